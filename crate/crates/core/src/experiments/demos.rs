//! Shipped cases and the demo runner behind `helmdist demo`.

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::{
    emit_csv, emit_svg, fit_rate, run_sweep_with_last, solution_plot, solve_case, sweep_plot,
    CaseSpec, Curve, ExperimentError, Plot, RateModel, Result, SweepTable, TransformKind,
};
use crate::analytic::{varadhan_1d, Example1d, Example1dProfile, Quadrature};
use crate::fields::{Grid, ScalarField};
use crate::geometry::{DesignDomain, Shape};
use crate::solver::{assemble_from_samples, solve, SolverConfig};
use crate::sources::{BoundarySpec, SourceSpec};

/// Sweep used for the one-dimensional rate studies.
pub const RATE_SWEEP: [f64; 7] = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5];
/// Sweep used for the two-dimensional signed study.
pub const DISK_SWEEP: [f64; 3] = [4e-3, 1e-3, 4e-4];

fn unit_interval_domain(shape: Shape<f64>) -> DesignDomain<f64> {
    DesignDomain::new(vec![-1.0], vec![1.0], shape).expect("shipped 1D geometry is valid")
}

fn unit_square_domain(shape: Shape<f64>) -> DesignDomain<f64> {
    DesignDomain::new(vec![-1.0, -1.0], vec![1.0, 1.0], shape)
        .expect("shipped 2D geometry is valid")
}

/// `Omega = (-1, 1)`, `f = (|x| - 2/3)^zeta` outside `[-2/3, 2/3]`, `g = 1`.
pub fn example1d_case(zeta: f64, a_list: &[f64]) -> CaseSpec {
    let ex = Example1d {
        zeta,
        ..Example1d::standard()
    };
    CaseSpec::new(
        &format!("example1d-zeta{zeta}"),
        unit_interval_domain(Shape::interval(0.0, ex.k)),
        SourceSpec::PowerLaw1D { k: ex.k, zeta },
        BoundarySpec::Constant(ex.alpha),
        a_list.to_vec(),
    )
}

/// `Omega = (-1, 1)`, `f = 1` outside `A = [-2/3, 2/3]`, `g = 1`.
pub fn indicator1d_case(a_list: &[f64]) -> CaseSpec {
    let shape = Shape::interval(0.0, 2.0 / 3.0);
    CaseSpec::new(
        "indicator1d",
        unit_interval_domain(shape.clone()),
        SourceSpec::IndicatorComplement {
            shape,
            amplitude: 1.0,
        },
        BoundarySpec::Constant(1.0),
        a_list.to_vec(),
    )
}

/// Signed variant of [`indicator1d_case`] with `C* = 1`.
pub fn signed1d_case(a_list: &[f64]) -> CaseSpec {
    let mut case = indicator1d_case(a_list).with_transform(TransformKind::Signed { c_star: 1.0 });
    case.name = "signed1d".into();
    case
}

/// `Omega = (-1, 1)^2`, `A` the disk of radius 1/2 at the origin, `f = 1`
/// outside it, `g = 1`.
pub fn disk2d_case(a_list: &[f64]) -> CaseSpec {
    let shape = Shape::ball(&[0.0, 0.0], 0.5);
    CaseSpec::new(
        "disk2d",
        unit_square_domain(shape.clone()),
        SourceSpec::IndicatorComplement {
            shape,
            amplitude: 1.0,
        },
        BoundarySpec::Constant(1.0),
        a_list.to_vec(),
    )
}

/// Signed variant of [`disk2d_case`] with `C* = 1`.
pub fn signed_disk2d_case(a_list: &[f64]) -> CaseSpec {
    let mut case = disk2d_case(a_list).with_transform(TransformKind::Signed { c_star: 1.0 });
    case.name = "signed2d".into();
    case
}

/// Two disjoint disks as the material region, `f = 1` outside them, `g = 1`,
/// signed transform with `C* = 1`.
pub fn two_material_case(a_list: &[f64]) -> CaseSpec {
    let shape = Shape::Union(vec![
        Shape::ball(&[-0.4, 0.0], 0.3),
        Shape::ball(&[0.4, 0.1], 0.25),
    ]);
    let mut case = CaseSpec::new(
        "two-material",
        unit_square_domain(shape.clone()),
        SourceSpec::IndicatorComplement {
            shape,
            amplitude: 1.0,
        },
        BoundarySpec::Constant(1.0),
        a_list.to_vec(),
    )
    .with_transform(TransformKind::Signed { c_star: 1.0 });
    case.name = "two-material".into();
    case
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Demo {
    Example1d,
    Varadhan1d,
    Disk2d,
    Signed1d,
    Signed2d,
    TwoMaterial,
}

impl Demo {
    pub const ALL: [Demo; 6] = [
        Demo::Example1d,
        Demo::Varadhan1d,
        Demo::Disk2d,
        Demo::Signed1d,
        Demo::Signed2d,
        Demo::TwoMaterial,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Demo::Example1d => "example1d",
            Demo::Varadhan1d => "varadhan1d",
            Demo::Disk2d => "disk2d",
            Demo::Signed1d => "signed1d",
            Demo::Signed2d => "signed2d",
            Demo::TwoMaterial => "two-material",
        }
    }

    /// The sweep behind the demo, when it is a plain case.
    pub fn case(&self) -> Option<CaseSpec> {
        match self {
            Demo::Example1d => Some(example1d_case(2.0, &[1e-4])),
            Demo::Varadhan1d => None,
            Demo::Disk2d => Some(disk2d_case(&[4e-3, 2e-3, 1e-3])),
            Demo::Signed1d => Some(signed1d_case(&[1e-2, 1e-3, 1e-4, 1e-5])),
            Demo::Signed2d => Some(signed_disk2d_case(&DISK_SWEEP)),
            Demo::TwoMaterial => Some(two_material_case(&[1e-3])),
        }
    }
}

impl fmt::Display for Demo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Demo {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self> {
        Demo::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| ExperimentError::Config(format!("unknown demo `{s}`")))
    }
}

#[derive(Debug, Clone, Default)]
pub struct DemoReport {
    pub lines: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl DemoReport {
    fn line(&mut self, s: String) {
        self.lines.push(s);
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| ExperimentError::io(path, e))
}

/// Runs a demo and writes its CSV and SVG files into `out_dir`.
pub fn run_demo(demo: Demo, out_dir: &Path) -> Result<DemoReport> {
    std::fs::create_dir_all(out_dir).map_err(|e| ExperimentError::io(out_dir, e))?;
    match demo {
        Demo::Example1d => power_law_profile_demo(out_dir),
        Demo::Varadhan1d => varadhan_demo(out_dir),
        _ => {
            let case = demo.case().expect("plain case");
            sweep_demo(&case, out_dir)
        }
    }
}

/// Writes `<name>.csv`, `<name>-rate.svg` and `<name>-field.svg`, and reports
/// the rows and fits.
fn sweep_demo(case: &CaseSpec, out_dir: &Path) -> Result<DemoReport> {
    let (table, last) = run_sweep_with_last(case)?;
    let mut report = DemoReport::default();
    let csv = out_dir.join(format!("{}.csv", case.name));
    emit_csv(&table, &csv)?;
    report.files.push(csv);
    describe_table(&table, &mut report);
    if table.rows.len() >= 3 {
        let rate = out_dir.join(format!("{}-rate.svg", case.name));
        emit_svg(&sweep_plot(&table), &rate)?;
        report.files.push(rate);
    }
    if let Some(s) = last {
        let field = out_dir.join(format!("{}-field.svg", case.name));
        emit_svg(
            &solution_plot(&s, &format!("{} at a = {}", case.name, s.a)),
            &field,
        )?;
        report.files.push(field);
        let nodes = out_dir.join(format!("{}-nodes.csv", case.name));
        let mut w = create(&nodes)?;
        s.write_nodes_csv(&mut w)
            .and_then(|_| w.flush())
            .map_err(|e| ExperimentError::io(&nodes, e))?;
        report.files.push(nodes);
    }
    Ok(report)
}

pub fn describe_table(table: &SweepTable, report: &mut DemoReport) {
    for r in &table.rows {
        match &r.error {
            None => report.line(format!(
                "a = {:e}: spacing {:.3e}, sup error {:.4e}, beta {:.4e}, sqrt(a) ln beta {:.4e}, iterations {}",
                r.a, r.spacing, r.sup_error, r.beta, r.scaled_log_beta, r.iterations
            )),
            Some(e) => report.line(format!("a = {:e}: failed: {e}", r.a)),
        }
    }
    for model in [RateModel::Power, RateModel::SqrtLog] {
        if let Ok(fit) = fit_rate(table, model) {
            report.line(format!(
                "{model} fit: value {:.4}, R^2 {:.4}",
                fit.value, fit.r_squared
            ));
        }
    }
    let inv = table.inversions();
    if !inv.is_empty() {
        report.line(format!("error grew as a decreased after rows {inv:?}"));
    }
}

/// Discrete and closed-form transforms for the power-law example at
/// `h = 1, k = 2/3, alpha = 1, zeta = 2, a = 1e-4`.
fn power_law_profile_demo(out_dir: &Path) -> Result<DemoReport> {
    let a = 1e-4;
    let ex = Example1d::standard();
    let case = example1d_case(ex.zeta, &[a]);
    let s = solve_case(&case, a)?;
    let profile = Example1dProfile::new(&ex, a, &Quadrature::default())?;
    let sa = a.sqrt();
    let grid = s.grid;
    let mut report = DemoReport::default();

    let csv = out_dir.join("example1d.csv");
    let mut w = create(&csv)?;
    let mut computed = Vec::new();
    let mut closed = Vec::new();
    let mut target = Vec::new();
    let (mut sup_discrete, mut sup_closed, mut sup_gap) = (0.0f64, 0.0f64, 0.0f64);
    let io = |e| ExperimentError::io(&csv, e);
    writeln!(w, "x,computed,closed_form,k_minus_abs_x").map_err(io)?;
    for i in 0..grid.len() {
        let x = grid.coords(i)[0];
        let d = s.transform.distance.get(i);
        let c = -sa * profile.log_u(x)?;
        let t = ex.k - x.abs();
        writeln!(w, "{x},{d},{c},{t}").map_err(io)?;
        computed.push((x, d));
        closed.push((x, c));
        target.push((x, t));
        if x.abs() <= ex.k {
            sup_discrete = sup_discrete.max((d - t).abs());
            sup_closed = sup_closed.max((c - t).abs());
            sup_gap = sup_gap.max((d - c).abs());
        }
    }
    w.flush().map_err(io)?;
    report.files.push(csv);
    report.line(format!("a = {a:e}, {} nodes", grid.len()));
    report.line(format!(
        "sup |discrete - (k - |x|)| on [-k, k]: {sup_discrete:.4e}"
    ));
    report.line(format!(
        "sup |closed form - (k - |x|)| on [-k, k]: {sup_closed:.4e}"
    ));
    report.line(format!(
        "sup |discrete - closed form| on [-k, k]: {sup_gap:.4e}"
    ));

    let svg = out_dir.join("example1d.svg");
    let plot = Plot::Lines {
        title: "-sqrt(a) ln u against k - |x|".into(),
        x_label: "x".into(),
        y_label: "value".into(),
        log_x: false,
        log_y: false,
        curves: vec![
            Curve::solid("-sqrt(a) ln u", computed),
            Curve::dashed("k - |x|", target),
        ],
    };
    emit_svg(&plot, &svg)?;
    report.files.push(svg);
    Ok(report)
}

/// Solves `-a u'' + u = 0` on `(-1, 1)` with `u(+-1) = 1` at `a = 1e-2` and
/// compares with `cosh(x / sqrt a) / cosh(1 / sqrt a)`.
pub fn solve_varadhan_1d(
    a: f64,
    spacing_factor: f64,
) -> Result<(ScalarField<f64>, ScalarField<f64>)> {
    let grid = Grid::with_max_spacing(&[-1.0], &[1.0], a.sqrt() / spacing_factor)?;
    let zero = ScalarField::constant(grid, 0.0);
    let one = ScalarField::constant(grid, 1.0);
    let system = assemble_from_samples(&grid, a, &zero, &one)?;
    let result = solve(&system, &SolverConfig::new(grid, a))?;
    let exact = ScalarField::from_fn(grid, |x| varadhan_1d(x[0], 1.0, a));
    Ok((result.u, exact))
}

fn varadhan_demo(out_dir: &Path) -> Result<DemoReport> {
    let a = 1e-2;
    let (u, exact) = solve_varadhan_1d(a, 8.0)?;
    let grid = *u.grid();
    let mut report = DemoReport::default();
    let csv = out_dir.join("varadhan1d.csv");
    let mut w = create(&csv)?;
    let io = |e| ExperimentError::io(&csv, e);
    writeln!(w, "x,computed,closed_form,error").map_err(io)?;
    let mut worst = 0.0f64;
    let mut computed = Vec::new();
    let mut closed = Vec::new();
    for i in 0..grid.len() {
        let x = grid.coords(i)[0];
        let (c, e) = (u.get(i), exact.get(i));
        worst = worst.max((c - e).abs());
        writeln!(w, "{x},{c},{e},{}", c - e).map_err(io)?;
        computed.push((x, c));
        closed.push((x, e));
    }
    w.flush().map_err(io)?;
    report.files.push(csv);
    report.line(format!(
        "a = {a:e}, {} nodes, max nodal error {worst:.4e}",
        grid.len()
    ));
    let svg = out_dir.join("varadhan1d.svg");
    let plot = Plot::Lines {
        title: "solution against cosh(x/sqrt a)/cosh(1/sqrt a)".into(),
        x_label: "x".into(),
        y_label: "u".into(),
        log_x: false,
        log_y: false,
        curves: vec![
            Curve::solid("discrete", computed),
            Curve::dashed("closed form", closed),
        ],
    };
    emit_svg(&plot, &svg)?;
    report.files.push(svg);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn demo_names_round_trip() {
        for d in Demo::ALL {
            assert_eq!(d.name().parse::<Demo>().unwrap(), d);
        }
        assert!("nope".parse::<Demo>().is_err());
    }

    #[test]
    fn shipped_cases_validate() {
        for d in Demo::ALL {
            if let Some(c) = d.case() {
                c.validate().unwrap();
            }
        }
        example1d_case(0.0, &RATE_SWEEP).validate().unwrap();
        indicator1d_case(&RATE_SWEEP).validate().unwrap();
    }
}
