use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_superint"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(bytes)))
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(
        &["verify", "--family", "soliton_V1a", "--omega", "1", "--hbar", "1", "--samples", "1000", "--seed", "42"],
        dir.path(),
    );
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    let report = json(&ok.stdout);
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["pass"], true);
    assert_eq!(report["samples"], 1000);
    assert!(report["results"].as_array().unwrap().len() >= 8);

    let bad = run(&["verify", "--family", "inverse_sq", "--a", "2", "--hbar", "1", "--include", "X4"], dir.path());
    assert_eq!(code(&bad), 1);
    let failing: Vec<String> = json(&bad.stdout)["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["pass"] == false)
        .map(|r| r["equation"].as_str().unwrap().to_string())
        .collect();
    assert!(!failing.is_empty() && failing.iter().all(|e| e.starts_with("X4")), "{failing:?}");

    assert_eq!(code(&run(&["verify", "--family", "nosuch"], dir.path())), 2);
    assert_eq!(code(&run(&["verify", "--family", "oscillator", "--samples", "0"], dir.path())), 2);
}

#[test]
fn classical_limit_flag_adds_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &["verify", "--family", "quantum_inverse_sq", "--samples", "200", "--classical-limit"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out.stdout);
    let n = report["results"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["equation"].as_str().unwrap().contains(":classical_limit:"))
        .count();
    assert!(n > 0);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# oscillator campaign\nfamily = oscillator\nsamples = 50\nseed = 3\nomega = 2\n").unwrap();
    let out = run(&["verify", "--config", "run.cfg", "--seed", "9", "--output", "r.json"], dir.path());
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&fs::read(dir.path().join("r.json")).unwrap());
    assert_eq!(report["family"], "oscillator");
    assert_eq!(report["samples"], 50);
    assert_eq!(report["seed"], 9);
    assert_eq!(report["params"]["omega"], 2.0);

    fs::write(&cfg, "family = oscillator\ncolour = blue\n").unwrap();
    assert_eq!(code(&run(&["verify", "--config", "run.cfg"], dir.path())), 2);
    assert_eq!(code(&run(&["verify", "--config", "missing.cfg"], dir.path())), 2);
}

#[test]
fn simulate_reports_drifts_and_guards_the_pericenter() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(
        &[
            "simulate", "--family", "oscillator", "--x", "1", "--y", "0", "--p1", "0", "--p2", "0.9", "--dt", "1e-3",
            "--steps", "100000", "--output", "traj.csv", "--summary", "summary.json",
        ],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = json(&fs::read(dir.path().join("summary.json")).unwrap());
    let drift = |q: &str| {
        summary["drifts"]
            .as_array()
            .unwrap()
            .iter()
            .find(|d| d["quantity"] == q)
            .and_then(|d| d["drift"].as_f64())
            .unwrap()
    };
    assert!(drift("L3") <= 1e-9);
    assert!(drift("H") <= 1e-6);
    let csv = fs::read_to_string(dir.path().join("traj.csv")).unwrap();
    assert!(csv.starts_with("t,x,y,p1,p2,H,X_L3,X_Q1,X_Q2\n"));
    assert_eq!(csv.lines().count(), 100_002);

    let free = run(&["simulate", "--family", "free", "--steps", "1000", "--output", "free.csv"], dir.path());
    assert_eq!(code(&free), 0);
    let free_summary = json(&free.stdout);
    for d in free_summary["drifts"].as_array().unwrap() {
        assert!(d["drift"].as_f64().unwrap() < 1e-14, "{d}");
    }

    let plunge = run(
        &["simulate", "--family", "coulomb", "--x", "1", "--y", "0", "--p1", "-1", "--p2", "0"],
        dir.path(),
    );
    assert_eq!(code(&plunge), 3);
    assert!(String::from_utf8_lossy(&plunge.stderr).contains("pericenter"));
}

#[test]
fn gridcheck_outcomes() {
    let dir = tempfile::tempdir().unwrap();
    let free = run(&["gridcheck", "--family", "free", "--spec", "p1^3", "--h", "0.05", "--levels", "2"], dir.path());
    assert_eq!(code(&free), 0, "{}", String::from_utf8_lossy(&free.stderr));
    assert!(String::from_utf8_lossy(&free.stderr).contains("floor-limited"));

    let corrupt = run(
        &["gridcheck", "--family", "quantum_inverse_sq", "--spec", "X7", "--corrupt", "--h", "0.05", "--levels", "2"],
        dir.path(),
    );
    assert_eq!(code(&corrupt), 1);
    let table = String::from_utf8_lossy(&corrupt.stdout);
    let order = |spec: &str| -> f64 {
        table
            .lines()
            .filter(|l| l.starts_with(&format!("{spec},aggregate,")))
            .filter_map(|l| l.rsplit(',').next()?.parse().ok())
            .next_back()
            .unwrap()
    };
    assert!((order("X7") - 2.0).abs() < 0.3, "{table}");
    assert!(order("X7~corrupt").abs() < 0.5, "{table}");

    let singular = run(&["gridcheck", "--family", "inverse_sq", "--box", "-1,1,-1,1"], dir.path());
    assert_eq!(code(&singular), 3);
    assert_eq!(code(&run(&["gridcheck", "--family", "coulomb", "--spec", "Q9"], dir.path())), 2);
}

#[test]
fn elliptic_selftest_detects_an_injected_fault() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(&["elliptic-selftest", "--samples", "500"], dir.path());
    assert_eq!(code(&ok), 0);
    let report = json(&ok.stdout);
    let moduli: Vec<f64> = report["moduli"].as_array().unwrap().iter().map(|v| v.as_f64().unwrap()).collect();
    assert_eq!(moduli.first(), Some(&0.0));
    assert_eq!(moduli.last(), Some(&0.99));
    assert_eq!(report["fault_injected"], false);

    let fault = run(&["elliptic-selftest", "--samples", "500", "--inject-fault"], dir.path());
    assert_eq!(code(&fault), 1);
    assert_eq!(json(&fault.stdout)["pass"], false);
}
