//! End-to-end runs of the `gop` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn gop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gop")).args(args).output().unwrap()
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn bundled(name: &str) -> String {
    configs().join(format!("{name}.toml")).display().to_string()
}

fn run_report(config: &str, dir: &Path, extra: &[&str]) -> (i32, Value) {
    let out = dir.join("r.report.json");
    let mut args = vec!["run", config, "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = gop(&args);
    let code = o.status.code().unwrap();
    let text = std::fs::read_to_string(&out).unwrap_or_else(|_| panic!("no report; stderr: {}", String::from_utf8_lossy(&o.stderr)));
    (code, serde_json::from_str(&text).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap_or_else(|| panic!("not a number: {v}"))
}

const EXP_M2: &str = r#"
name = "exp"
m = 2
[family]
kind = "exponential"
[scheme]
kind = "hankel_shift"
tau = 1.0
[[truth]]
lambda = [-0.3, 1.0]
coeff = 1.5
[[truth]]
lambda = [0.4, -0.6]
coeff = [-1.0, 0.25]
"#;

#[test]
fn reports_are_deterministic_apart_from_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["legendre_table3", "noisy_exp_shift"] {
        let (_, mut a) = run_report(&bundled(name), dir.path(), &[]);
        let csv_a = std::fs::read(dir.path().join("r.measurements.csv")).unwrap();
        let (_, mut b) = run_report(&bundled(name), dir.path(), &[]);
        let csv_b = std::fs::read(dir.path().join("r.measurements.csv")).unwrap();
        a["wall_time_s"] = Value::Null;
        b["wall_time_s"] = Value::Null;
        assert_eq!(
            serde_json::to_string_pretty(&a).unwrap(),
            serde_json::to_string_pretty(&b).unwrap(),
            "{name}"
        );
        assert_eq!(csv_a, csv_b, "{name}");
    }
}

#[test]
fn seed_override_changes_noise_only_through_the_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled("noisy_exp_shift");
    let (_, a) = run_report(&cfg, dir.path(), &["--seed", "7"]);
    let (_, b) = run_report(&cfg, dir.path(), &["--seed", "7"]);
    let (_, c) = run_report(&cfg, dir.path(), &["--seed", "8"]);
    assert_eq!(a["seed"], 7);
    assert_eq!(a["recovery"], b["recovery"]);
    assert_ne!(a["recovery"], c["recovery"]);
}

#[test]
fn legendre_table3_degrees() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = run_report(&bundled("legendre_table3"), dir.path(), &[]);
    assert_eq!(code, 0);
    assert_eq!(r["schema_version"], 1);
    assert_eq!(r["scheme"]["raw_measurement_count"], 6);
    let terms = r["errors"]["terms"].as_array().unwrap();
    assert_eq!(terms.len(), 3);
    for t in terms {
        assert!(f(&t["lambda_unrounded_error"]) <= 1e-2, "{t}");
        assert_eq!(f(&t["lambda_error"]), 0.0, "{t}");
    }
    // 2M kernel columns plus x, default grid
    let kernels = std::fs::read_to_string(dir.path().join("r.kernels.csv")).unwrap();
    let lines: Vec<&str> = kernels.lines().collect();
    assert_eq!(lines[0], "x,k0,k1,k2,k3,k4,k5");
    assert_eq!(lines.len(), 1 + gop_cli::DEFAULT_KERNEL_SAMPLES);
}

#[test]
fn expo_m1_trivial_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = run_report(&bundled("expo_m1_trivial"), dir.path(), &[]);
    assert_eq!(code, 0);
    assert!(f(&r["errors"]["max_lambda_error"]) <= 1e-15);
    assert!(f(&r["errors"]["max_coeff_error"]) <= 1e-15);
}

#[test]
fn cos_exp_family_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let (code, r) = run_report(&bundled("cos_exp_family"), dir.path(), &[]);
    assert_eq!(code, 0);
    assert!(f(&r["errors"]["max_lambda_error"]) <= 1e-6);
    assert!(f(&r["errors"]["max_coeff_error"]) <= 1e-6);
}

fn simulated_rows(config: &str) -> usize {
    let o = gop(&["simulate", config]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("measurement_id,real,imag\n"));
    text.lines().count() - 1
}

#[test]
fn simulate_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(simulated_rows(&write(dir.path(), "a.toml", EXP_M2)), 4);
    let strided = EXP_M2.replace("\"hankel_shift\"", "\"strided_shift\"");
    assert_eq!(simulated_rows(&write(dir.path(), "b.toml", &strided)), 5);
    assert_eq!(simulated_rows(&bundled("legendre_table3")), 6);
}

#[test]
fn simulated_csv_feeds_back_into_recovery() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "truth.toml", EXP_M2);
    let csv = dir.path().join("meas.csv");
    assert!(gop(&["simulate", &cfg, "--out", csv.to_str().unwrap()]).status.success());
    let blind = EXP_M2.split("[[truth]]").next().unwrap().to_string() + "[measurements]\ncsv = \"meas.csv\"\n";
    let (code, r) = run_report(&write(dir.path(), "blind.toml", &blind), dir.path(), &[]);
    assert_eq!(code, 0);
    assert!(r["errors"].is_null());
    let lambdas = r["recovery"]["eigenvalues"].as_array().unwrap();
    let want = [(-0.3, 1.0), (0.4, -0.6)];
    for (re, im) in want {
        assert!(lambdas.iter().any(|l| (f(&l[0]) - re).hypot(f(&l[1]) - im) < 1e-10), "{lambdas:?}");
    }
}

#[test]
fn exit_code_two_for_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        EXP_M2.replace("m = 2", "m = 0"),
        EXP_M2.replace("tau = 1.0", "tau = 4.0"),
        EXP_M2.replace("name = \"exp\"", "name = \"exp\"\ncolour = 1"),
        EXP_M2.split("[[truth]]").next().unwrap().to_string(),
        EXP_M2.to_string() + "[noise]\nkind = \"gaussian\"\nsigma = -1.0\n",
    ];
    for (i, text) in cases.iter().enumerate() {
        let cfg = write(dir.path(), &format!("bad{i}.toml"), text);
        let o = gop(&["run", &cfg, "--out", dir.path().join("x.json").to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));
    }
    assert_eq!(gop(&["run", dir.path().join("missing.toml").to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn exit_code_three_for_recovery_failure_with_report() {
    // two terms requested, one present: the sampling matrix has rank one
    let dir = tempfile::tempdir().unwrap();
    let text = EXP_M2.rsplit_once("[[truth]]").unwrap().0;
    let (code, r) = run_report(&write(dir.path(), "short.toml", text), dir.path(), &[]);
    assert_eq!(code, 3);
    assert_eq!(r["status"], "recovery_failed");
    assert!(r["recovery"].is_null());
    assert!(r["errors"].is_null());
    assert!(r["error"].as_str().unwrap().contains("recovery failed"));
}

#[test]
fn exit_code_one_for_unwritable_output() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = write(dir.path(), "file", "");
    let out = format!("{blocker}/r.json");
    let o = gop(&["run", &bundled("expo_m1_trivial"), "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn every_bundled_config_runs() {
    let dir = tempfile::tempdir().unwrap();
    let o = gop(&["batch", configs().to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{stdout}");
    let count = std::fs::read_dir(configs()).unwrap().filter(|e| e.as_ref().unwrap().path().extension().is_some_and(|x| x == "toml")).count();
    assert_eq!(stdout.lines().count(), count);
    for entry in std::fs::read_dir(dir.path()).unwrap() {
        let p = entry.unwrap().path();
        if !p.to_str().unwrap().ends_with(".report.json") {
            continue;
        }
        let r: Value = serde_json::from_str(&std::fs::read_to_string(&p).unwrap()).unwrap();
        assert_eq!(r["status"], "ok", "{}", p.display());
        if !r["errors"].is_null() {
            assert!(f(&r["errors"]["max_lambda_unrounded_error"]) <= 1e-4, "{}", p.display());
        }
    }
}
