use std::io::Write;
use std::process::{Command, Output};

use serde_json::Value;

fn rdna(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdna")).args(args).env_remove("RDNA_SEED").output().unwrap()
}

fn rdna_env(args: &[&str], seed: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rdna")).args(args).env("RDNA_SEED", seed).output().unwrap()
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_str(&stdout(o)).unwrap()
}

fn csv_column(text: &str, name: &str) -> Vec<String> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

fn model_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

const SCALAR: &str = "# fully observed, alpha = 0.5\ndims = 1 1 1 1\nA = 0.5\nB = 1\nC = 1\nN = 0\n";

#[test]
fn memoryless_bsms_curve() {
    let out = stdout(&rdna(&["bsms-curve", "--p", "0.5", "--d-grid", "0:0.5:0.1"]));
    let d = csv_column(&out, "D");
    let rate = csv_column(&out, "rate");
    assert_eq!(d.len(), 6);
    for (d, r) in d.iter().zip(&rate) {
        let d: f64 = d.parse().unwrap();
        let h = if d == 0.0 { 0.0 } else { -(d * d.log2() + (1.0 - d) * (1.0 - d).log2()) };
        assert!((r.parse::<f64>().unwrap() - (1.0 - h)).abs() < 1e-11);
    }
}

#[test]
fn csv_header_and_precision() {
    let out = stdout(&rdna(&["bsms-curve", "--p", "0.25", "--d", "0.02859"]));
    assert!(out.starts_with("label,D,rate,gray_bound,gray_exact,gray_critical_d,rate_loss_bound\n"));
    assert_eq!(csv_column(&out, "gray_exact"), vec!["1"]);
    for cell in csv_column(&out, "rate") {
        let digits = cell.chars().filter(|c| c.is_ascii_digit()).collect::<String>();
        assert!(digits.trim_start_matches('0').len() <= 12, "{cell}");
        assert!(!cell.contains(' ') && !cell.contains(';'));
    }
}

#[test]
fn invalid_grids_are_usage_errors() {
    for grid in ["1:0:0.1", "0:1", "0:1:0", "a:b:c"] {
        assert_eq!(rdna(&["bsms-curve", "--p", "0.3", "--d-grid", grid]).status.code(), Some(2), "{grid}");
    }
    assert_eq!(rdna(&["bsms-curve", "--p", "0.3"]).status.code(), Some(2));
    assert_eq!(rdna(&["bsms-curve", "--p", "0.3", "--d", "0.1", "--bogus", "1"]).status.code(), Some(2));
}

#[test]
fn domain_errors_exit_four() {
    assert_eq!(rdna(&["bsms-curve", "--p", "1.5", "--d", "0.1"]).status.code(), Some(4));
    assert_eq!(rdna(&["rate-loss", "--p", "0.7", "--d", "0.1"]).status.code(), Some(4));
}

#[test]
fn gauss_rate_from_model_file() {
    let f = model_file(SCALAR);
    let out = stdout(&rdna(&["gauss-rate", "--model", f.path().to_str().unwrap(), "--d", "0.5"]));
    let rate: f64 = csv_column(&out, "rate")[0].parse().unwrap();
    assert!((rate - 0.584962500721).abs() < 1e-11);

    let sat = json(&rdna(&["gauss-rate", "--model", f.path().to_str().unwrap(), "--d", "5", "--format", "json"]));
    assert_eq!(sat["rows"][0]["rate"], 0.0);
    assert_eq!(sat["rows"][0]["saturated"], true);
    assert!(sat["rows"][0]["note"].as_str().unwrap().contains("saturated"));
}

#[test]
fn gauss_rate_failures() {
    let bad = model_file("dims = 1 1 1 1\nA = 0.5 0.2\nB = 1\nC = 1\nN = 0\n");
    assert_eq!(rdna(&["gauss-rate", "--model", bad.path().to_str().unwrap(), "--d", "0.5"]).status.code(), Some(2));
    assert_eq!(rdna(&["gauss-rate", "--model", "/nonexistent/model.txt", "--d", "0.5"]).status.code(), Some(2));

    // unstable mode the output never sees
    let blind = model_file("dims = 2 2 1 1\nA = 1.5 0\n    0 0.5\nB = 1 0\n    0 1\nC = 0 1\nN = 0.1\n");
    let o = rdna(&["gauss-rate", "--model", blind.path().to_str().unwrap(), "--d", "0.5"]);
    assert_eq!(o.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&o.stderr).contains("detectab"));

    let o = rdna(&["gauss-rate", "--alpha", "0.5", "--d", "0.3", "--max-iter", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("residual"));
}

#[test]
fn feedback_simulation_report() {
    let v = json(&rdna(&["jscc-sim", "--mode", "fb", "--alpha", "0.5", "--sigma-w", "1", "--sigma-vc", "1", "--power", "1", "--steps", "200000", "--format", "json"]));
    assert_eq!(v["schema"], "rdna.v1");
    let dist = &v["rows"][0];
    assert_eq!(dist["quantity"], "distortion");
    assert!((dist["analytic"].as_f64().unwrap() - 0.571428571429).abs() < 1e-12);
    let emp = dist["empirical"].as_f64().unwrap();
    let se = dist["std_error"].as_f64().unwrap();
    assert!((emp - 0.571428571429).abs() <= (0.01 * 0.5714f64).max(4.0 * se));
    assert_eq!(v["summary"]["design"]["mode"], "feedback");
}

#[test]
fn schalkwijk_kailath_column() {
    let out = stdout(&rdna(&["jscc-sim", "--mode", "sk", "--sigma-x", "1", "--power", "1", "--sigma-vc", "1", "--steps", "5", "--trials", "20000"]));
    let analytic: Vec<f64> = csv_column(&out, "analytic_mse").iter().map(|s| s.parse().unwrap()).collect();
    assert_eq!(analytic, (0..=5).map(|t| 0.5f64.powi(t)).collect::<Vec<_>>());
}

#[test]
fn vector_mode_needs_model_and_target() {
    assert_eq!(rdna(&["jscc-sim", "--mode", "vector"]).status.code(), Some(2));
    let f = model_file("dims = 2 2 2 2\nA = 0.7 0.2 0 0.5\nB = 1 0 0 1\nC = 1 0 0 1\nN = 0.3 0 0 0.3\n");
    let out = stdout(&rdna(&["jscc-sim", "--mode", "vector", "--model", f.path().to_str().unwrap(), "--d", "0.5", "--steps", "20000"]));
    assert_eq!(csv_column(&out, "quantity")[..2], ["distortion".to_string(), "total_power".to_string()]);
}

#[test]
fn same_seed_same_bytes() {
    let args = ["jscc-sim", "--mode", "nfb", "--steps", "50000", "--seed", "11", "--format", "json"];
    assert_eq!(stdout(&rdna(&args)), stdout(&rdna(&args)));
    let other = ["jscc-sim", "--mode", "nfb", "--steps", "50000", "--seed", "12", "--format", "json"];
    assert_ne!(stdout(&rdna(&args)), stdout(&rdna(&other)));
    let ex = ["excess", "--p", "0.3", "--d", "0.1", "--n", "300,600", "--trials", "2000"];
    assert_eq!(stdout(&rdna(&ex)), stdout(&rdna(&ex)));
}

#[test]
fn seed_from_environment() {
    let args = ["jscc-sim", "--mode", "iid", "--steps", "20000", "--format", "json"];
    let env = json(&rdna_env(&args, "77"));
    assert_eq!(env["seed"], 77);
    let flag = json(&rdna(&["jscc-sim", "--mode", "iid", "--steps", "20000", "--format", "json", "--seed", "77"]));
    assert_eq!(env, flag);
    let both = json(&rdna_env(&["jscc-sim", "--mode", "iid", "--steps", "20000", "--format", "json", "--seed", "5"], "77"));
    assert_eq!(both["seed"], 5);
    assert_eq!(rdna_env(&args, "not-a-number").status.code(), Some(2));
}

#[test]
fn excess_table_without_trials() {
    let out = stdout(&rdna(&["excess", "--p", "0.3", "--d", "0.1", "--gamma", "0.1", "--n", "1000,2000,3000,4000"]));
    assert!(!out.lines().next().unwrap().contains("empirical"));
    assert_eq!(csv_column(&out, "hoeffding_valid"), vec!["0", "1", "1", "1"]);
    let h: Vec<f64> = csv_column(&out, "hoeffding")[1..].iter().map(|s| s.parse().unwrap()).collect();
    assert!(h.windows(2).all(|w| w[1] < w[0]));
    assert!((h[1] - 0.999271615).abs() < 1e-6);
}

#[test]
fn rate_function_sweep() {
    let out = stdout(&rdna(&["excess", "--p", "0.3", "--d", "0.1", "--theta-grid", "0.1:1:0.05"]));
    let v: Vec<f64> = csv_column(&out, "rate_function").iter().map(|s| s.parse().unwrap()).collect();
    assert!(v[0] < 1e-6);
    assert!(v.windows(2).all(|w| w[1] >= w[0]));
}

#[test]
fn output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("peak.json");
    let o = rdna(&["rate-loss", "--format", "json", "--out", path.to_str().unwrap()]);
    assert!(o.status.success() && o.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!((v["rows"][0]["rate_loss_bound"].as_f64().unwrap() - 0.2144).abs() < 1e-3);
}
