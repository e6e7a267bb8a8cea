use std::path::Path;
use std::process::{Command, Output};

use compulse::output::ScanTable;
use tempfile::TempDir;

fn compulse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_compulse")).args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn propagate_preset_sets() {
    let out = compulse(&["propagate", "--preset", "fig2-3pulse"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("P1->2 = 1.000000"));
    let out = compulse(&["propagate", "--preset", "single-2pi-pair"]);
    assert!(stdout(&out).contains("P0->2 = 1.000000"));
}

#[test]
fn config_errors_exit_with_2() {
    let dir = TempDir::new().unwrap();
    let empty = write(&dir, "empty.toml", "system = \"V\"\n");
    let out = compulse(&["propagate", "--config", &empty]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sequence is empty"));

    let no_phi01 = write(&dir, "y.toml", "system = \"Y\"\n[[pulse]]\nphi12 = 0.0\nphi13 = 0.0\n");
    let out = compulse(&["scan", "--config", &no_phi01]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pulse[0].phi01"));

    let broken = write(&dir, "broken.toml", "system = \"V\"\n\n[[pulse]]\nphi12 = [\n");
    let out = compulse(&["scan", "--config", &broken]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 4"));

    assert_eq!(compulse(&["scan", "--config", "/no/such/file.toml"]).status.code(), Some(2));
    assert_eq!(compulse(&["scan", "--preset", "no-such-preset"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_3() {
    let out = compulse(&["scan", "--preset", "single-pi", "--out", "/no/such/dir/table.csv"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn single_pulse_scan_is_cos_squared() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("single.csv");
    let out = compulse(&["scan", "--preset", "single-pi", "--out", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let table = ScanTable::read_csv(std::fs::File::open(&csv).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 101);
    for r in &table.rows {
        assert!((r.p_target - r.point.theta.cos().powi(2)).abs() < 1e-10);
    }
}

fn nominal_cell(path: &Path) -> f64 {
    let table = ScanTable::read_csv(std::fs::File::open(path).unwrap()).unwrap();
    table
        .rows
        .iter()
        .find(|r| r.point.theta == 0.0 && (r.point.area - std::f64::consts::PI).abs() < 1e-12 && r.point.detuning == 0.0)
        .expect("grid contains the nominal point")
        .p_target
}

#[test]
fn joint_landscapes_have_unit_nominal_cell() {
    let dir = TempDir::new().unwrap();
    for (preset, tol) in [("fig3-area", 1e-12), ("fig5-detuning", 1e-4)] {
        let path = dir.path().join(format!("{preset}.csv"));
        // 101 points put A = pi and detuning 0 exactly on the grid
        let out = compulse(&["scan", "--preset", preset, "--out", path.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        assert!((nominal_cell(&path) - 1.0).abs() < tol, "{preset}");
    }
}

#[test]
fn scan_output_round_trips_byte_for_byte() {
    let text = stdout(&compulse(&["scan", "--preset", "fig4-6pair"]));
    let table = ScanTable::read_csv(text.as_bytes()).unwrap();
    assert_eq!(table.to_csv_string(), text);
}

#[test]
fn oracle_scan_agrees_with_analytic_scan() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "oracle.toml",
        "preset = \"fig2-3pulse\"\n[scan]\noracle = true\n[[scan.axis]]\nvariable = \"theta\"\nmin = 0.0\nmax = 0.5\npoints = 11\n",
    );
    let oracle = ScanTable::read_csv(stdout(&compulse(&["scan", "--config", &cfg])).as_bytes()).unwrap();
    let analytic_cfg = write(
        &dir,
        "analytic.toml",
        "preset = \"fig2-3pulse\"\n[[scan.axis]]\nvariable = \"theta\"\nmin = 0.0\nmax = 0.5\npoints = 11\n",
    );
    let analytic = ScanTable::read_csv(stdout(&compulse(&["scan", "--config", &analytic_cfg])).as_bytes()).unwrap();
    for (a, o) in analytic.rows.iter().zip(&oracle.rows) {
        assert_eq!(a.point, o.point);
        assert!((a.p_target - o.p_target).abs() < 1e-9);
    }
}

#[test]
fn verify_fixtures_pass() {
    assert_eq!(compulse(&["verify", "--preset", "fig2-3pulse"]).status.code(), Some(0));
    let dir = TempDir::new().unwrap();
    let cfg = write(
        &dir,
        "fig5.toml",
        "preset = \"fig5-detuning\"\n[point]\ndetuning = 0.8\n[[scan.axis]]\nvariable = \"theta\"\nmin = 0.0\nmax = 0.5\npoints = 21\n",
    );
    let out = compulse(&["verify", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(stdout(&out).contains("status = pass"));
}

#[test]
fn verify_reports_integrator_shortfall() {
    // too few steps for the bar: not a deviation of the closed form, but the
    // step-doubling check refuses to certify the integration
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "coarse.toml", "preset = \"fig2-3pulse\"\n[verify]\nstep_count = 100\ntolerance_target = 1e-14\n");
    assert_eq!(compulse(&["verify", "--config", &cfg]).status.code(), Some(4));
}

#[test]
fn solve_writes_a_catalog() {
    let dir = TempDir::new().unwrap();
    let cfg = write(&dir, "solve.toml", "system = \"Y\"\n[solve]\nn_pulses = 2\nrestarts = 4\n");
    let path = dir.path().join("catalog.json");
    let out = compulse(&["solve", "--config", &cfg, "--seed", "5", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&path).unwrap();
    let catalog: serde_json::Value = serde_json::from_str(&text).unwrap();
    let best = &catalog[0];
    assert_eq!(best["system"], "Y");
    assert_eq!(best["seed"], 5);
    assert_eq!(best["converged"], true);
    assert_eq!(best["phases_pi"].as_array().unwrap().len(), 2);
    assert!(best["nominal_fidelity"].as_f64().unwrap() > 1.0 - 1e-12);
    // numbers carry 17 significant digits
    assert!(text.contains("e0") && !text.contains("NaN"));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    for cmd in ["scan", "solve"] {
        let one = compulse(&[cmd, "--preset", "fig4-2pair", "--threads", "1"]);
        let four = compulse(&[cmd, "--preset", "fig4-2pair", "--threads", "4"]);
        assert_eq!(one.status.code(), Some(0));
        assert_eq!(one.stdout, four.stdout, "{cmd}");
    }
}
