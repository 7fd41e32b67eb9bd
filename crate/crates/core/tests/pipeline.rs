use std::path::PathBuf;

use helmdist::experiments::demos::{disk2d_case, indicator1d_case, run_demo, Demo};
use helmdist::experiments::{fit_rate, load_case, run_sweep, solve_case, RateModel};

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

#[test]
fn shipped_configs_load() {
    let mut count = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            load_case(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 3);
}

#[test]
fn indicator_sweep_error_falls_with_a() {
    let table = run_sweep(&indicator1d_case(&[1e-2, 1e-3, 1e-4, 1e-5])).unwrap();
    let errors = table.sup_errors();
    assert_eq!(errors.len(), 4);
    for w in errors.windows(2) {
        assert!(w[1] < w[0], "{errors:?}");
    }
    let fit = fit_rate(&table, RateModel::Power).unwrap();
    assert!((fit.value - 0.5).abs() < 0.05, "{fit:?}");
}

#[test]
fn disk_solution_is_mirror_symmetric() {
    let s = solve_case(&disk2d_case(&[4e-3]), 4e-3).unwrap();
    let g = s.grid;
    let (nx, ny) = (g.nodes(0), g.nodes(1));
    let u = s.solution.u.values();
    let mut worst: f64 = 0.0;
    for j in 0..ny {
        for i in 0..nx {
            let v = u[g.index(i, j)];
            worst = worst.max((v - u[g.index(nx - 1 - i, j)]).abs());
            worst = worst.max((v - u[g.index(j, i)]).abs());
        }
    }
    assert!(worst < 1e-9, "asymmetry {worst:e}");
}

#[test]
fn disk_matches_one_dimensional_radial_trend() {
    // distance errors in 2D stay within a small multiple of the 1D error at the same a
    let a = 1e-3;
    let one = solve_case(&indicator1d_case(&[a]), a).unwrap();
    let two = solve_case(&disk2d_case(&[a]), a).unwrap();
    assert!(
        two.sup_error < 4.0 * one.sup_error,
        "{} vs {}",
        two.sup_error,
        one.sup_error
    );
    assert!(
        two.sup_error > 0.25 * one.sup_error,
        "{} vs {}",
        two.sup_error,
        one.sup_error
    );
}

#[test]
fn demos_write_nonempty_outputs() {
    let dir = tempfile::tempdir().unwrap();
    for demo in [
        Demo::Example1d,
        Demo::Varadhan1d,
        Demo::Signed1d,
        Demo::Disk2d,
    ] {
        let report = run_demo(demo, dir.path()).unwrap();
        assert!(!report.lines.is_empty(), "{demo}");
        assert!(!report.files.is_empty(), "{demo}");
        for f in &report.files {
            assert!(std::fs::metadata(f).unwrap().len() > 0, "{}", f.display());
        }
    }
    let svg = std::fs::read_to_string(dir.path().join("example1d.svg")).unwrap();
    assert!(svg.matches("<polyline").count() >= 2);
    let heat = std::fs::read_to_string(dir.path().join("disk2d-field.svg")).unwrap();
    assert!(heat.matches("<rect").count() > 100);
}

#[test]
fn demo_sweeps_trend_downward() {
    // one inversion is tolerated, and only between the two coarsest rows
    for demo in Demo::ALL {
        let Some(case) = demo.case() else { continue };
        if case.a_list.len() < 2 {
            continue;
        }
        let table = run_sweep(&case).unwrap();
        assert_eq!(table.successful().count(), case.a_list.len(), "{demo}");
        let inv = table.inversions();
        assert!(
            inv.is_empty() || inv == [0],
            "{demo}: inversions {inv:?} in {:?}",
            table.sup_errors()
        );
    }
}
