use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use helmdist::experiments::demos::{describe_table, run_demo, Demo, DemoReport};
use helmdist::experiments::{
    emit_csv, emit_svg, fit_rate, load_case, run_sweep_with_last, solution_plot, solve_case,
    sweep_plot, ExperimentError, RateModel,
};
use helmdist::sources::{estimate_zeta, mean_condition_scan};

#[derive(Debug, Parser)]
#[command(
    name = "helmdist",
    version,
    about = "Distance fields from the screened Poisson equation -a Lap(u) + u = f"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One solve and transform; writes coordinates, computed, oracle, error.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Full sweep over the configured a-list with rate fits and plots.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Scans the ball-mean condition of the configured source at its interface.
    ValidateMean {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        zeta: f64,
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..=2))]
        p: u32,
        /// Ball radii to scan.
        #[arg(long, value_delimiter = ',', default_values_t = vec![0.01, 0.02, 0.05, 0.1])]
        eps: Vec<f64>,
        /// Interface sample points.
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Shipped reproductions.
    Demo {
        #[arg(long, value_parser = demo_name)]
        name: Demo,
        #[arg(long, default_value = "demo-out")]
        out_dir: PathBuf,
    },
}

fn demo_name(s: &str) -> Result<Demo, String> {
    s.parse().map_err(|_| {
        let names: Vec<&str> = Demo::ALL.iter().map(|d| d.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

fn print(report: &DemoReport) {
    for line in &report.lines {
        println!("{line}");
    }
    for f in &report.files {
        println!("wrote {}", f.display());
    }
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> ExperimentError + '_ {
    move |e| ExperimentError::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn solve_cmd(config: &Path, a: f64, out: &Path) -> Result<(), ExperimentError> {
    let case = load_case(config)?;
    let s = solve_case(&case, a)?;
    let mut w = BufWriter::new(File::create(out).map_err(io(out))?);
    s.write_nodes_csv(&mut w)
        .and_then(|_| w.flush())
        .map_err(io(out))?;
    println!(
        "a = {a:e}: {} nodes, spacing {:.4e}, iterations {}, sup error {:.4e}, beta {:.4e}, sqrt(a) ln beta {:.4e}",
        s.grid.len(),
        s.grid.max_spacing(),
        s.solution.iterations,
        s.sup_error,
        s.beta.beta,
        s.beta.scaled_log
    );
    if s.transform.excluded > 0 {
        println!("{} nodes excluded after underflow", s.transform.excluded);
    }
    println!("wrote {}", out.display());
    Ok(())
}

fn sweep_cmd(config: &Path, out_dir: &Path) -> Result<(), ExperimentError> {
    let case = load_case(config)?;
    std::fs::create_dir_all(out_dir).map_err(io(out_dir))?;
    let (table, last) = run_sweep_with_last(&case)?;
    let mut report = DemoReport::default();
    describe_table(&table, &mut report);

    let csv = out_dir.join("sweep.csv");
    emit_csv(&table, &csv)?;
    report.files.push(csv);

    let fits = out_dir.join("fits.csv");
    let mut w = BufWriter::new(File::create(&fits).map_err(io(&fits))?);
    writeln!(w, "model,value,r_squared,rows").map_err(io(&fits))?;
    for model in [RateModel::Power, RateModel::SqrtLog] {
        if let Ok(fit) = fit_rate(&table, model) {
            writeln!(w, "{model},{},{},{}", fit.value, fit.r_squared, fit.rows)
                .map_err(io(&fits))?;
        }
    }
    w.flush().map_err(io(&fits))?;
    report.files.push(fits);

    let rate = out_dir.join("rate.svg");
    emit_svg(&sweep_plot(&table), &rate)?;
    report.files.push(rate);
    if let Some(s) = last {
        let field = out_dir.join("field.svg");
        emit_svg(
            &solution_plot(&s, &format!("{} at a = {}", case.name, s.a)),
            &field,
        )?;
        report.files.push(field);
    }
    print(&report);
    Ok(())
}

fn validate_mean_cmd(
    config: &Path,
    zeta: f64,
    p: u32,
    eps: &[f64],
    samples: usize,
) -> Result<(), ExperimentError> {
    let case = load_case(config)?;
    let scan = mean_condition_scan(&case.source, case.shape(), zeta, p, eps, samples)?;
    println!("zeta = {zeta}, p = {p}, eps = {eps:?}, {samples} interface samples");
    println!(
        "inf = {:.6e}, sup = {:.6e}, sup/inf = {:.4}",
        scan.inf,
        scan.sup,
        scan.ratio()
    );
    println!(
        "condition {}",
        if scan.passes() {
            "holds on the scanned range"
        } else {
            "fails"
        }
    );
    match estimate_zeta(&case.source, case.shape(), eps) {
        Ok(z) => println!("estimated zeta = {z:.4}"),
        Err(e) => println!("zeta estimate unavailable: {e}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), ExperimentError> {
    match cli.command {
        Command::Solve { config, a, out } => solve_cmd(&config, a, &out),
        Command::Sweep { config, out_dir } => sweep_cmd(&config, &out_dir),
        Command::ValidateMean {
            config,
            zeta,
            p,
            eps,
            samples,
        } => validate_mean_cmd(&config, zeta, p, &eps, samples),
        Command::Demo { name, out_dir } => {
            print(&run_demo(name, &out_dir)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
