//! End-to-end runs of the `entflow` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn entflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_entflow")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn write_config(dir: &Path, json: &str) -> String {
    let p = dir.join("config.json");
    fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

fn run(cmd: &str, dir: &TempDir, json: &str, extra: &[&str]) -> (Output, std::path::PathBuf) {
    let cfg = write_config(dir.path(), json);
    let out = dir.path().join("out");
    let mut args = vec![cmd, "--config", cfg.as_str(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    (entflow(&args), out)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn last_snapshot(out: &Path) -> Vec<f64> {
    let mut snaps: Vec<_> = fs::read_dir(out.join("snapshots")).unwrap().map(|e| e.unwrap().path()).collect();
    snaps.sort();
    let text = fs::read_to_string(snaps.last().unwrap()).unwrap();
    text.lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| l.split_whitespace().last().unwrap().parse().unwrap())
        .collect()
}

#[test]
fn circle_grows_like_the_exact_solution() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run("simulate", &dir, r#"{"t_end": 1.5}"#, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let h = last_snapshot(&out);
    assert_eq!(h.len(), 32);
    assert!(h.iter().all(|v| (v - 2.0).abs() < 1e-8), "{h:?}");
    for f in ["diagnostics.csv", "effective_config.json", "report.json", "curves/curve_01500.txt"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
}

#[test]
fn non_convex_initial_data_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"initial": {"kind": "fourier", "constant": 1.0, "terms": [[2, 0.8, 0.0]]}}"#;
    let (o, _) = run("simulate", &dir, json, &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("convex"));
}

#[test]
fn ellipse_run_reports_the_l2_slope() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"initial": {"kind": "ellipse", "a": 1.3, "b": 1.0}, "t_end": 0.5}"#;
    let (o, out) = run("simulate", &dir, json, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = report(&out);
    let slope = r["monitors"]["M9_h_l2_slope"]["value"].as_f64().unwrap();
    assert!((slope - 4.0 * std::f64::consts::PI).abs() < 1e-4 * slope);
    assert_eq!(r["exit_code"], 0);
    assert_eq!(r["records"], 501);
}

#[test]
fn runs_are_reproducible_from_the_effective_config() {
    let dir = TempDir::new().unwrap();
    let json = r#"{"initial": {"kind": "fourier", "constant": 1.0, "terms": [[2, 0.05, 0.0], [3, 0.0, 0.02]]},
                   "t_end": 0.05, "n": 64, "seed": 3, "record_layer": 1.05}"#;
    let (o, out) = run("simulate", &dir, json, &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let again = dir.path().join("again");
    let eff = out.join("effective_config.json");
    let o2 = entflow(&["simulate", "--config", eff.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code(&o2), 0);
    for f in ["diagnostics.csv", "report.json", "snapshots/snap_00100.txt"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f} differs");
    }
    let mut first: Value = serde_json::from_slice(&fs::read(&eff).unwrap()).unwrap();
    let second: Value = serde_json::from_slice(&fs::read(again.join("effective_config.json")).unwrap()).unwrap();
    first["output_dir"] = second["output_dir"].clone();
    assert_eq!(first, second);
}

#[test]
fn rescaled_fixed_points_are_stationary() {
    for (variant, h) in [("rescaled_chainrule", 1.0 / (2.0 * std::f64::consts::PI)), ("rescaled_paper", 1.0)] {
        let dir = TempDir::new().unwrap();
        let json = format!(r#"{{"initial": {{"kind": "circle", "r": {h}}}, "t_end": 0.01}}"#);
        let (o, out) = run("rescaled", &dir, &json, &["--variant", variant]);
        assert_eq!(code(&o), 0, "{variant}: {}", String::from_utf8_lossy(&o.stdout));
        assert!(last_snapshot(&out).iter().all(|v| (v - h).abs() < 1e-12), "{variant}");
    }
}

#[test]
fn rescaled_command_rejects_the_unscaled_variant() {
    let dir = TempDir::new().unwrap();
    let (o, _) = run("rescaled", &dir, "{}", &[]);
    assert_eq!(code(&o), 1);
}

#[test]
fn crosscheck_passes_on_circle_and_ellipse() {
    for initial in [r#"{"kind": "circle", "r": 1.0}"#, r#"{"kind": "ellipse", "a": 2.0, "b": 1.0}"#] {
        let dir = TempDir::new().unwrap();
        let json = format!(r#"{{"initial": {initial}, "n": 256}}"#);
        let (o, out) = run("crosscheck", &dir, &json, &["--draws", "5"]);
        assert_eq!(code(&o), 0, "{initial}: {}", String::from_utf8_lossy(&o.stdout));
        let csv = fs::read_to_string(out.join("crosscheck.csv")).unwrap();
        assert!(csv.lines().count() > 5);
        assert!(out.join("crosscheck.json").exists());
    }
}

#[test]
fn verify_exit_codes() {
    let dir = TempDir::new().unwrap();
    let o = entflow(&["verify", "circle", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("criterion 01 PASS"));
    assert!(dir.path().join("verify_circle.json").exists());
    assert_eq!(code(&entflow(&["verify", "bogus"])), 1);
}

#[test]
fn config_errors_map_to_exit_codes() {
    let dir = TempDir::new().unwrap();
    let missing = dir.path().join("nope.json");
    assert_eq!(code(&entflow(&["simulate", "--config", missing.to_str().unwrap()])), 4);
    let (o, _) = run("simulate", &dir, r#"{"colour": "red"}"#, &[]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn plot_writes_a_gnuplot_script() {
    let dir = TempDir::new().unwrap();
    let (o, out) = run("simulate", &dir, r#"{"t_end": 0.02}"#, &[]);
    assert_eq!(code(&o), 0);
    assert_eq!(code(&entflow(&["plot", out.to_str().unwrap()])), 0);
    let script = fs::read_to_string(out.join("plot.gp")).unwrap();
    assert!(script.contains("diagnostics.csv"));
}
