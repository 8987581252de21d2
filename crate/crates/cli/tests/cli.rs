use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_derivex"))
}

fn shipped(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("scenario.toml");
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn scan(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["scan", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = run(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    o
}

fn summary(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap()
}

const BASE: &str = r#"
[market]
rate = 0.03
expiry = 1.0

[implied]
mu = 1.030454533953517
alpha = 0.04
beta = 0.0

[subjective]
mu = SUBJ_MU
alpha = 0.04
beta = SUBJ_BETA

[[instruments]]
kind = "cash"

[[instruments]]
kind = "call"
strike = 1.0

[[constraints]]
order = 1
bound = 0.1
"#;

fn base(subj_mu: &str, subj_beta: &str) -> String {
    BASE.replace("SUBJ_MU", subj_mu).replace("SUBJ_BETA", subj_beta)
}

fn bs_call_atm(rate: f64, var: f64) -> f64 {
    let sd = var.sqrt();
    let d1 = (rate + var / 2.0) / sd;
    let n = |z: f64| 0.5 * libm::erfc(-z / std::f64::consts::SQRT_2);
    n(d1) - (-rate).exp() * n(d1 - sd)
}

#[test]
fn price_reports_cash_and_black_scholes() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &base("1.030454533953517", "0.0"));
    let out = dir.path().join("out");
    let o = run(&["price", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&fs::read_to_string(out.join("price.json")).unwrap()).unwrap();
    let df = (-0.03f64).exp();
    assert!((report["discount_factor"].as_f64().unwrap() - df).abs() < 1e-15);
    let inst = report["instruments"].as_array().unwrap();
    assert!((inst[0]["market_value"].as_f64().unwrap() - df).abs() < 1e-12);
    let call = inst[1]["market_value"].as_f64().unwrap();
    assert!((call - bs_call_atm(0.03, 0.04)).abs() < 1e-6);
    for i in inst {
        assert_eq!(i["difference"].as_f64().unwrap(), 0.0);
    }
    let densities = fs::read_to_string(out.join("densities.csv")).unwrap();
    assert!(densities.starts_with("x,implied_pdf,subjective_pdf\n"));
    assert_eq!(densities.lines().count(), 2002);
}

#[test]
fn scan_writes_one_row_per_node() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    scan(&shipped("two_instrument.toml"), &out, &[]);
    let csv = fs::read_to_string(out.join("scan.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "alpha_1_deg,rho_1_unit,n_max,status,xi_best");
    assert_eq!(lines.count(), 720);
    let s = summary(&out);
    assert_eq!(s["status"], "feasible");
    assert_eq!(s["binding_constraint"], 0);
    let q = s["quantities"].as_array().unwrap();
    assert!(q[0].as_f64().unwrap() > 0.0 && q[1].as_f64().unwrap() < 0.0);
}

#[test]
fn agreeing_views_give_flat_optimum() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &base("1.030454533953517", "0.0"));
    let out = dir.path().join("out");
    scan(&cfg, &out, &["--resolution", "72"]);
    let s = summary(&out);
    assert_eq!(s["xi"].as_f64().unwrap(), 0.0);
    assert_eq!(s["status"], "flat");
    assert!(s["quantities"].as_array().unwrap().iter().all(|v| v.as_f64().unwrap() == 0.0));
}

#[test]
fn third_instrument_never_hurts() {
    let dir = TempDir::new().unwrap();
    let (o2, o3) = (dir.path().join("two"), dir.path().join("three"));
    scan(&shipped("two_instrument.toml"), &o2, &["--resolution", "360"]);
    scan(&shipped("three_instrument.toml"), &o3, &["--resolution", "360"]);
    let (x2, x3) = (summary(&o2)["xi"].as_f64().unwrap(), summary(&o3)["xi"].as_f64().unwrap());
    assert!(x3 >= x2, "{x3} < {x2}");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &base("1.06", "0.3"));
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    scan(&cfg, &a, &["--resolution", "180", "--refine", "200", "--seed", "3"]);
    scan(&cfg, &b, &["--resolution", "180", "--refine", "200", "--seed", "3"]);
    for f in ["scan.csv", "summary.json", "densities.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn single_instrument_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let body = base("1.06", "0.3").replace("[[instruments]]\nkind = \"cash\"\n", "");
    let cfg = write_config(dir.path(), &body);
    let o = run(&["scan", "--config", cfg.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn negative_beta_reports_field_and_line() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(dir.path(), &base("1.06", "-0.1"));
    let o = run(&["price", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("subjective.beta") && err.contains("line 14"), "{err}");
}

#[test]
fn missing_config_is_an_io_error() {
    let o = run(&["price", "--config", "/nonexistent/derivex.toml"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unwritable_output_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let out = blocker.join("out");
    let o = run(&[
        "scan",
        "--config",
        shipped("two_instrument.toml").to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--resolution",
        "16",
    ]);
    assert_eq!(o.status.code(), Some(3));
}
