//! Convergence sweeps over the diffusion `a`, rate fits, and CSV/SVG output.
//!
//! The harness is double precision only. A [`CaseSpec`] fixes the domain,
//! data, list of `a` values and the grid rule; [`run_sweep`] solves each row,
//! transforms the solution and compares it with an exact or brute-force
//! distance oracle.

mod config;
pub mod demos;
mod plot;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use thiserror::Error;

use crate::analytic::AnalyticError;
use crate::fields::{FieldError, Grid, ScalarField};
use crate::geometry::{
    brute_force_distance_field, exact_distance, exact_signed_distance, omega_star_mask,
    rasterize_interface, shape_mask, DesignDomain, GeometryError, Shape,
};
use crate::solver::{
    assemble, assemble_from_samples, solve, SolveResult, SolverConfig, SolverError,
};
use crate::sources::{BoundarySpec, SourceError, SourceSpec};
use crate::transform::{
    beta_diagnostic, distance_field, error_range, signed_distance_field_with_complement,
    BetaDiagnostic, TransformError, TransformResult,
};

pub use config::{load_case, parse_case, ConfigFile};
pub use plot::{emit_svg, render_svg, Curve, Plot};

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Analytic(#[from] AnalyticError),
    #[error("maximum principle violated at a = {a}: u in [{min}, {max}], bound {bound}")]
    BoundViolation {
        a: f64,
        min: f64,
        max: f64,
        bound: f64,
    },
    #[error("rate fit needs at least 3 successful rows, got {0}")]
    InsufficientRows(usize),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl ExperimentError {
    /// Process exit code: 2 configuration, 3 numerical failure, 4 IO.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExperimentError::Config(_)
            | ExperimentError::Geometry(_)
            | ExperimentError::Source(_)
            | ExperimentError::Field(_) => 2,
            ExperimentError::Solver(e) => match e {
                SolverError::NoConvergence { .. } => 3,
                _ => 2,
            },
            ExperimentError::Transform(TransformError::InvalidArgument(_)) => 2,
            ExperimentError::Analytic(AnalyticError::InvalidArgument(_)) => 2,
            ExperimentError::Transform(_)
            | ExperimentError::Analytic(_)
            | ExperimentError::BoundViolation { .. }
            | ExperimentError::InsufficientRows(_) => 3,
            ExperimentError::Io { .. } => 4,
        }
    }

    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        ExperimentError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

/// How the grid is chosen for each `a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GridRule {
    /// Spacing at most `sqrt(a) / factor` on every axis.
    Tied { factor: f64 },
    /// Same node count per axis for every `a`.
    Fixed { nodes: usize },
}

impl Default for GridRule {
    fn default() -> Self {
        GridRule::Tied { factor: 8.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleKind {
    /// Distances from the exact geometry.
    Exact,
    /// Nearest rasterized interface node.
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TransformKind {
    /// `-sqrt(a) ln u` against `d(x, dA)` on the closed set `A`.
    Distance,
    /// Two-branch transform against the signed distance on `Omega*`.
    Signed { c_star: f64 },
}

/// One experiment: geometry, data, `a` values and evaluation choices.
///
/// There is no rate parameter here: the exponent in `a^(1/2 - tau)` only
/// enters through [`fit_rate`] when comparing against the power model.
#[derive(Debug, Clone)]
pub struct CaseSpec {
    pub name: String,
    pub domain: DesignDomain<f64>,
    pub source: SourceSpec<f64>,
    pub boundary: BoundarySpec<f64>,
    /// Strictly decreasing.
    pub a_list: Vec<f64>,
    pub grid_rule: GridRule,
    pub oracle: OracleKind,
    pub transform: TransformKind,
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Measure wall time per row. Off gives byte-identical CSVs across runs.
    pub record_timing: bool,
}

impl CaseSpec {
    pub fn new(
        name: &str,
        domain: DesignDomain<f64>,
        source: SourceSpec<f64>,
        boundary: BoundarySpec<f64>,
        a_list: Vec<f64>,
    ) -> Self {
        Self {
            name: name.to_string(),
            domain,
            source,
            boundary,
            a_list,
            grid_rule: GridRule::default(),
            oracle: OracleKind::Exact,
            transform: TransformKind::Distance,
            tolerance: 1e-10,
            max_iterations: 50_000,
            record_timing: true,
        }
    }

    pub fn with_transform(mut self, transform: TransformKind) -> Self {
        self.transform = transform;
        self
    }

    pub fn with_grid_rule(mut self, rule: GridRule) -> Self {
        self.grid_rule = rule;
        self
    }

    pub fn with_oracle(mut self, oracle: OracleKind) -> Self {
        self.oracle = oracle;
        self
    }

    pub fn without_timing(mut self) -> Self {
        self.record_timing = false;
        self
    }

    /// Zero set `A` of the source.
    pub fn shape(&self) -> &Shape<f64> {
        self.domain.shape()
    }

    pub fn validate(&self) -> Result<()> {
        self.source.validate()?;
        self.boundary.validate()?;
        if self.a_list.is_empty() {
            return Err(ExperimentError::Config("a-list is empty".into()));
        }
        for w in self.a_list.windows(2) {
            if !(w[1] < w[0]) {
                return Err(ExperimentError::Config(format!(
                    "a-list must be strictly decreasing ({} then {})",
                    w[0], w[1]
                )));
            }
        }
        for &a in &self.a_list {
            if !(1e-8..=1.0).contains(&a) {
                return Err(SolverError::InvalidDiffusion(a).into());
            }
        }
        if !(self.tolerance > 0.0 && self.tolerance <= 1e-4) {
            return Err(SolverError::InvalidTolerance(self.tolerance).into());
        }
        match self.grid_rule {
            GridRule::Tied { factor } => {
                if !(factor >= 4.0 && factor.is_finite()) {
                    return Err(ExperimentError::Config(format!(
                        "spacing factor {factor} must be at least 4"
                    )));
                }
            }
            GridRule::Fixed { nodes } => {
                let a_min = self.a_list[self.a_list.len() - 1];
                let grid = self.grid_for(a_min)?;
                let limit = a_min.sqrt() / 4.0;
                if grid.max_spacing() > limit * (1.0 + 1e-12) {
                    return Err(ExperimentError::Config(format!(
                        "{nodes} nodes per axis give spacing {} above sqrt(a)/4 = {limit} at a = {a_min}",
                        grid.max_spacing()
                    )));
                }
            }
        }
        if let Some(zero_set) = self.source.zero_set() {
            if zero_set != *self.shape() {
                return Err(ExperimentError::Config(
                    "source zero set differs from the domain's shape".into(),
                ));
            }
        }
        if let TransformKind::Signed { c_star } = self.transform {
            match &self.source {
                SourceSpec::IndicatorComplement { amplitude, .. }
                    if (amplitude - c_star).abs() <= 1e-12 * c_star => {}
                _ => {
                    return Err(ExperimentError::Config(
                        "signed transform needs an indicator-complement source with amplitude C*"
                            .into(),
                    ))
                }
            }
        }
        Ok(())
    }

    pub fn grid_for(&self, a: f64) -> Result<Grid<f64>> {
        let d = &self.domain;
        Ok(match self.grid_rule {
            GridRule::Tied { factor } => d.grid(a.sqrt() / factor)?,
            GridRule::Fixed { nodes } => match d.dim() {
                1 => Grid::new_1d(nodes, d.lo()[0], d.hi()[0])?,
                _ => Grid::new_2d(
                    [nodes, nodes],
                    [d.lo()[0], d.lo()[1]],
                    [d.hi()[0], d.hi()[1]],
                )?,
            },
        })
    }
}

/// Everything produced by one solve of a case.
#[derive(Debug, Clone)]
pub struct CaseSolution {
    pub a: f64,
    pub grid: Grid<f64>,
    pub solution: SolveResult<f64>,
    /// `C* - u`, solved directly (signed transform only).
    pub complement: Option<SolveResult<f64>>,
    pub transform: TransformResult<f64>,
    pub oracle: ScalarField<f64>,
    pub sup_error: f64,
    /// `(min, max)` of computed minus oracle over the trusted region.
    pub error_range: (f64, f64),
    pub beta: BetaDiagnostic<f64>,
    pub wall_time: f64,
}

impl CaseSolution {
    /// Per-node CSV: coordinates, computed, oracle, error (trusted nodes only).
    pub fn write_nodes_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        self.grid
            .write_coord_header(&mut w, &["computed", "oracle", "error"])?;
        for i in self.transform.valid.indices() {
            let c = self.transform.distance.get(i);
            let o = self.oracle.get(i);
            self.grid.write_coords(&mut w, i)?;
            writeln!(w, ",{c},{o},{}", c - o)?;
        }
        Ok(())
    }
}

fn check_bounds(a: f64, result: &SolveResult<f64>) -> Result<()> {
    let b = &result.bounds;
    if !b.passed {
        return Err(ExperimentError::BoundViolation {
            a,
            min: b.min_u,
            max: b.max_u,
            bound: b.bound,
        });
    }
    Ok(())
}

/// Assemble, solve, transform and compare for a single `a`.
pub fn solve_case(case: &CaseSpec, a: f64) -> Result<CaseSolution> {
    case.validate()?;
    let start = Instant::now();
    let grid = case.grid_for(a)?;
    let config = SolverConfig {
        tolerance: case.tolerance,
        max_iterations: case.max_iterations,
        ..SolverConfig::new(grid, a)
    };
    let system = assemble(&case.domain, &grid, a, &case.source, &case.boundary)?;
    let solution = solve(&system, &config)?;
    check_bounds(a, &solution)?;

    let shape = case.shape();
    let interface = rasterize_interface(shape, &grid)?;
    let region_a = shape_mask(shape, &grid);
    let beta = beta_diagnostic(&solution.u, &interface, a)?;
    let dim = grid.dim();
    let brute = match case.oracle {
        OracleKind::Exact => None,
        OracleKind::BruteForce => Some(brute_force_distance_field(&interface, &grid)?),
    };

    let (transform, oracle, complement) = match case.transform {
        TransformKind::Distance => {
            let t = distance_field(&solution.u, a, &region_a)?;
            let oracle = match brute {
                Some(b) => b,
                None => ScalarField::from_fn(grid, |x| exact_distance(shape, x)),
            };
            (t, oracle, None)
        }
        TransformKind::Signed { c_star } => {
            let mut sup_g = 0.0f64;
            for i in (0..grid.len()).filter(|&i| grid.is_boundary(i)) {
                sup_g = sup_g.max(case.boundary.evaluate(&grid.coords(i)[..dim]));
            }
            if sup_g > c_star {
                return Err(ExperimentError::Config(format!(
                    "C* = {c_star} is below sup g = {sup_g}"
                )));
            }
            let source_c = ScalarField::from_fn(grid, |x| c_star - case.source.evaluate(x));
            let boundary_c = ScalarField::from_fn(grid, |x| c_star - case.boundary.evaluate(x));
            let comp_system = assemble_from_samples(&grid, a, &source_c, &boundary_c)?;
            let comp = solve(&comp_system, &config)?;
            let omega_star = omega_star_mask(&case.domain, &grid);
            let t = signed_distance_field_with_complement(
                &solution.u,
                &comp.u,
                a,
                c_star,
                &region_a,
                &omega_star,
            )?;
            let oracle = match brute {
                Some(b) => {
                    let mut b = b;
                    for i in region_a.indices() {
                        b.values_mut()[i] = -b.get(i);
                    }
                    b
                }
                None => ScalarField::from_fn(grid, |x| exact_signed_distance(shape, x)),
            };
            (t, oracle, Some(comp))
        }
    };
    let range = error_range(&transform.distance, &oracle, &transform.valid)?;
    let sup_error = range.0.abs().max(range.1.abs());
    let transform = transform.with_beta(beta);
    let wall_time = if case.record_timing {
        start.elapsed().as_secs_f64()
    } else {
        0.0
    };
    Ok(CaseSolution {
        a,
        grid,
        solution,
        complement,
        transform,
        oracle,
        sup_error,
        error_range: range,
        beta,
        wall_time,
    })
}

/// One row of a sweep. Numeric fields are NaN when `error` is set.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub a: f64,
    pub spacing: f64,
    pub sup_error: f64,
    /// Most negative `computed - oracle` over the trusted region.
    pub min_error: f64,
    pub beta: f64,
    pub scaled_log_beta: f64,
    pub iterations: usize,
    pub wall_time: f64,
    /// Trusted-region nodes dropped because the solution underflowed.
    pub excluded: usize,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    fn from_solution(s: &CaseSolution) -> Self {
        Self {
            a: s.a,
            spacing: s.grid.max_spacing(),
            sup_error: s.sup_error,
            min_error: s.error_range.0,
            beta: s.beta.beta,
            scaled_log_beta: s.beta.scaled_log,
            iterations: s.solution.iterations + s.complement.as_ref().map_or(0, |c| c.iterations),
            wall_time: s.wall_time,
            excluded: s.transform.excluded,
            error: None,
        }
    }

    fn failed(case: &CaseSpec, a: f64, e: &ExperimentError) -> Self {
        Self {
            a,
            spacing: case
                .grid_for(a)
                .map(|g| g.max_spacing())
                .unwrap_or(f64::NAN),
            sup_error: f64::NAN,
            min_error: f64::NAN,
            beta: f64::NAN,
            scaled_log_beta: f64::NAN,
            iterations: 0,
            wall_time: 0.0,
            excluded: 0,
            error: Some(e.to_string()),
        }
    }
}

/// Rows in the order of the case's a-list.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub name: String,
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn successful(&self) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(|r| r.is_ok())
    }

    pub fn sup_errors(&self) -> Vec<f64> {
        self.successful().map(|r| r.sup_error).collect()
    }

    /// Row indices `i` (among successful rows) where the error grew from row
    /// `i` to row `i + 1`, i.e. as `a` decreased.
    pub fn inversions(&self) -> Vec<usize> {
        let e = self.sup_errors();
        (0..e.len().saturating_sub(1))
            .filter(|&i| e[i + 1] > e[i])
            .collect()
    }
}

/// Solves every row of the case; rows run in parallel and failures are
/// recorded in place.
pub fn run_sweep(case: &CaseSpec) -> Result<SweepTable> {
    Ok(run_sweep_with_last(case)?.0)
}

/// [`run_sweep`], also returning the full solution for the smallest `a`
/// when that row succeeded.
pub fn run_sweep_with_last(case: &CaseSpec) -> Result<(SweepTable, Option<CaseSolution>)> {
    case.validate()?;
    let last = case.a_list.len() - 1;
    let results: Vec<(SweepRow, Option<CaseSolution>)> = case
        .a_list
        .par_iter()
        .enumerate()
        .map(|(k, &a)| match solve_case(case, a) {
            Ok(s) => (SweepRow::from_solution(&s), (k == last).then_some(s)),
            Err(e) => (SweepRow::failed(case, a, &e), None),
        })
        .collect();
    let (rows, mut solutions): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok((
        SweepTable {
            name: case.name.clone(),
            rows,
        },
        solutions.pop().flatten(),
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateModel {
    /// `sup_error ~ C a^p`, fitted in log-log.
    Power,
    /// `sup_error ~ C sqrt(a) ln(1/a)`, fitted through the origin.
    SqrtLog,
}

impl fmt::Display for RateModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateModel::Power => "power",
            RateModel::SqrtLog => "sqrtlog",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub model: RateModel,
    /// Exponent `p` for the power model, constant `C` for sqrtlog.
    pub value: f64,
    /// Coefficient of determination. Centered for the power model,
    /// uncentered for the through-origin sqrtlog model.
    pub r_squared: f64,
    pub rows: usize,
}

/// Least-squares fit of the successful rows to `model`.
pub fn fit_rate(table: &SweepTable, model: RateModel) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = table
        .successful()
        .filter(|r| r.sup_error.is_finite() && r.sup_error > 0.0)
        .map(|r| (r.a, r.sup_error))
        .collect();
    fit_points(&pts, model)
}

/// Same as [`fit_rate`] on raw `(a, error)` pairs.
pub fn fit_points(pts: &[(f64, f64)], model: RateModel) -> Result<RateFit> {
    if pts.len() < 3 {
        return Err(ExperimentError::InsufficientRows(pts.len()));
    }
    let n = pts.len() as f64;
    match model {
        RateModel::Power => {
            let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
            let slope = sxy / sxx;
            let ss_res: f64 = xs
                .iter()
                .zip(&ys)
                .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
                .sum();
            let ss_tot: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
            let r_squared = if ss_tot > 0.0 {
                1.0 - ss_res / ss_tot
            } else {
                1.0
            };
            Ok(RateFit {
                model,
                value: slope,
                r_squared,
                rows: pts.len(),
            })
        }
        RateModel::SqrtLog => {
            let xs: Vec<f64> = pts.iter().map(|p| p.0.sqrt() * (1.0 / p.0).ln()).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
            let sxx: f64 = xs.iter().map(|x| x * x).sum();
            let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| x * y).sum();
            let c = sxy / sxx;
            let ss_res: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - c * x).powi(2)).sum();
            let ss_tot: f64 = ys.iter().map(|y| y * y).sum();
            Ok(RateFit {
                model,
                value: c,
                r_squared: 1.0 - ss_res / ss_tot,
                rows: pts.len(),
            })
        }
    }
}

pub const CSV_HEADER: &str = "a,spacing,sup_error,beta,scaled_log_beta,iterations,wall_time";

/// Writes the table as CSV; failed rows keep only `a` and `spacing`.
pub fn write_csv<W: Write>(table: &SweepTable, mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in &table.rows {
        if r.is_ok() {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.a, r.spacing, r.sup_error, r.beta, r.scaled_log_beta, r.iterations, r.wall_time
            )?;
        } else {
            writeln!(w, "{},{},,,,,", r.a, r.spacing)?;
        }
    }
    Ok(())
}

pub fn emit_csv(table: &SweepTable, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| ExperimentError::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_csv(table, &mut w).map_err(|e| ExperimentError::io(path, e))?;
    w.flush().map_err(|e| ExperimentError::io(path, e))
}

/// Log-log plot of the sweep errors next to the `sqrt(a) ln(1/a)` reference
/// scaled by the fitted constant.
pub fn sweep_plot(table: &SweepTable) -> Plot {
    let pts: Vec<(f64, f64)> = table.successful().map(|r| (r.a, r.sup_error)).collect();
    let mut curves = vec![Curve::solid("sup error", pts.clone())];
    if let Ok(fit) = fit_points(&pts, RateModel::SqrtLog) {
        let reference = pts
            .iter()
            .map(|&(a, _)| (a, fit.value * a.sqrt() * (1.0 / a).ln()))
            .collect();
        curves.push(Curve::dashed(
            &format!("{:.3} sqrt(a) ln(1/a)", fit.value),
            reference,
        ));
    }
    Plot::Lines {
        title: format!("{}: error against a", table.name),
        x_label: "a".into(),
        y_label: "sup error".into(),
        log_x: true,
        log_y: true,
        curves,
    }
}

/// Curves (1D) or heatmap with the zero contour (2D) of a solved case.
pub fn solution_plot(s: &CaseSolution, title: &str) -> Plot {
    if s.grid.dim() == 1 {
        let valid = &s.transform.valid;
        let mut computed = Vec::new();
        let mut oracle = Vec::new();
        for i in valid.indices() {
            let x = s.grid.coords(i)[0];
            computed.push((x, s.transform.distance.get(i)));
            oracle.push((x, s.oracle.get(i)));
        }
        Plot::Lines {
            title: title.to_string(),
            x_label: "x".into(),
            y_label: "distance".into(),
            log_x: false,
            log_y: false,
            curves: vec![
                Curve::solid("computed", computed),
                Curve::dashed("exact", oracle),
            ],
        }
    } else {
        let contour = if s.transform.c_star.is_some() {
            Some(0.0)
        } else {
            None
        };
        Plot::Heatmap {
            title: title.to_string(),
            field: s.transform.distance.clone(),
            mask: Some(s.transform.valid.clone()),
            contour,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(points: &[(f64, f64)]) -> SweepTable {
        SweepTable {
            name: "synthetic".into(),
            rows: points
                .iter()
                .map(|&(a, e)| SweepRow {
                    a,
                    spacing: a.sqrt() / 8.0,
                    sup_error: e,
                    min_error: -e,
                    beta: 0.5,
                    scaled_log_beta: a.sqrt() * 0.5f64.ln(),
                    iterations: 0,
                    wall_time: 0.0,
                    excluded: 0,
                    error: None,
                })
                .collect(),
        }
    }

    #[test]
    fn power_fit_recovers_exponent() {
        let a: [f64; 4] = [1e-2, 1e-3, 1e-4, 1e-5];
        let t = table(&a.map(|a| (a, a.sqrt())));
        let fit = fit_rate(&t, RateModel::Power).unwrap();
        assert!((fit.value - 0.5).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let t = table(&a.map(|a| (a, 3.0 * a.powf(0.37))));
        assert!((fit_rate(&t, RateModel::Power).unwrap().value - 0.37).abs() < 1e-12);
    }

    #[test]
    fn sqrtlog_fit_recovers_constant() {
        let a: [f64; 4] = [1e-2, 3e-3, 1e-3, 1e-4];
        let t = table(&a.map(|a| (a, 2.0 * a.sqrt() * (1.0 / a).ln())));
        let fit = fit_rate(&t, RateModel::SqrtLog).unwrap();
        assert!((fit.value - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn fits_need_three_rows() {
        let t = table(&[(1e-2, 0.1), (1e-3, 0.03)]);
        assert!(matches!(
            fit_rate(&t, RateModel::Power),
            Err(ExperimentError::InsufficientRows(2))
        ));
        let mut t = table(&[(1e-2, 0.1), (1e-3, 0.03), (1e-4, 0.01)]);
        t.rows[1].error = Some("failed".into());
        assert!(matches!(
            fit_rate(&t, RateModel::SqrtLog),
            Err(ExperimentError::InsufficientRows(2))
        ));
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_csv(
            &SweepTable {
                name: "empty".into(),
                rows: vec![],
            },
            &mut buf,
        )
        .unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), format!("{CSV_HEADER}\n"));
        let mut t = table(&[(0.01, 0.25)]);
        t.rows[0].wall_time = 1.5;
        let mut buf = Vec::new();
        write_csv(&t, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        assert_eq!(line.split(',').count(), 7);
        assert!(line.starts_with("0.01,0.0125,0.25,0.5,"));
    }

    #[test]
    fn inversions_are_reported() {
        let t = table(&[(1e-2, 0.1), (1e-3, 0.2), (1e-4, 0.05), (1e-5, 0.01)]);
        assert_eq!(t.inversions(), vec![0]);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(ExperimentError::Config("x".into()).exit_code(), 2);
        assert_eq!(
            ExperimentError::Solver(SolverError::NoConvergence {
                iterations: 1,
                residual: 1.0
            })
            .exit_code(),
            3
        );
        assert_eq!(
            ExperimentError::Analytic(AnalyticError::LossOfPrecision("x".into())).exit_code(),
            3
        );
        let io = ExperimentError::io(Path::new("/x"), std::io::Error::other("boom"));
        assert_eq!(io.exit_code(), 4);
        assert!(io.to_string().starts_with("/x"));
    }
}
