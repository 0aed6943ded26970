use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

const DEFAULT_1D: &str = r#"{
  "domain": { "kind": "interval", "length": 1.0 },
  "alpha": 0.5,
  "grid": { "cells": 256 },
  "coefficients": { "a11": 1.0, "rho": 1.0, "lambda": 1.0 },
  "seed": 42,
  "analysis": { "samples": 200, "eigenvalues": 10, "boundedness_trials": 20, "trials": 50 }
}
"#;

fn run(dir: &Path, config: &str, args: &[&str]) -> Output {
    run_env(dir, config, args, &[])
}

fn run_env(dir: &Path, config: &str, args: &[&str], env: &[(&str, &str)]) -> Output {
    let cfg = dir.join("config.json");
    fs::write(&cfg, config).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_fracspec"));
    cmd.args(args)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .arg("--quiet");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn identities_on_the_default_config() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), DEFAULT_1D, &["identities"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v = json(&dir.path().join("out/identities.json"));
    assert_eq!(v["pass"], true);
    assert_eq!(v["seed"], 42);
    assert_eq!(
        v["config_sha256"].as_str().unwrap(),
        hex::encode(Sha256::digest(DEFAULT_1D.as_bytes()))
    );
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 8);
    for c in checks {
        assert_eq!(c["pass"], true, "{c}");
    }
    let mass = checks.iter().find(|c| c["id"] == "kernel-mass").unwrap();
    assert!(mass["value"].as_f64().unwrap() < 1e-8);
    let covered: Vec<&str> = v["checks_covered"].as_array().unwrap().iter().map(|c| c.as_str().unwrap()).collect();
    assert!(covered.contains(&"derivative-adjointness"));
}

#[test]
fn sandwich_writes_the_eigenvalue_table() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), DEFAULT_1D, &["sandwich"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/eigenvalues.csv")).unwrap();
    assert!(!csv.contains('\r'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,lambda_L0,lambda_H,lambda_L1,pass"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for (i, row) in rows.iter().enumerate() {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0], (i + 1).to_string());
        // 17 significant digits: d.dddddddddddddddde±x
        let mantissa = f[2].split('e').next().unwrap();
        assert_eq!(mantissa.chars().filter(|c| c.is_ascii_digit()).count(), 17);
        let (l0, lh, l1): (f64, f64, f64) = (f[1].parse().unwrap(), f[2].parse().unwrap(), f[3].parse().unwrap());
        assert!(l0 <= lh && lh <= l1);
        assert_eq!(f[4], "true");
    }
    let v = json(&dir.path().join("out/sandwich.json"));
    assert_eq!(v["result"]["report"]["all_pass"], true);
}

#[test]
fn range_and_sector_files() {
    let dir = TempDir::new().unwrap();
    let o = run(dir.path(), DEFAULT_1D, &["range"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/range.csv")).unwrap();
    assert!(csv.starts_with("re,im\n"));
    assert_eq!(csv.lines().count(), 201);
    let v = json(&dir.path().join("out/sector.json"));
    assert_eq!(v["result"]["gamma_positive"], true);
    assert!(v["result"]["fitted"]["theta"].as_f64().unwrap() < std::f64::consts::FRAC_PI_2);
}

#[test]
fn holder_exponent_not_above_alpha_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = DEFAULT_1D.replace("\"lambda\": 1.0", "\"lambda\": 0.5");
    let o = run(dir.path(), &cfg, &["accretivity"]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("config.json:5:"), "{err}");
    assert!(err.contains("α < λ ≤ 1"), "{err}");
    assert!(!dir.path().join("out/accretivity.json").exists());
}

#[test]
fn malformed_configs_exit_with_line_anchors() {
    let dir = TempDir::new().unwrap();
    let unknown = DEFAULT_1D.replace("\"seed\": 42,", "\"seed\": 42, \"sed\": 1,");
    let o = run(dir.path(), &unknown, &["identities"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config.json:6:"), "{}", stderr(&o));
    assert!(stderr(&o).contains("unknown field `sed`"));

    let missing = DEFAULT_1D.replace("\"seed\": 42,", "");
    let o = run(dir.path(), &missing, &["identities"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("missing field `seed`"), "{}", stderr(&o));

    let expr = DEFAULT_1D.replace("\"rho\": 1.0", "\"rho\": \"1 + sin(x\"");
    let o = run(dir.path(), &expr, &["identities"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config.json:5:"), "{}", stderr(&o));

    let o = run(dir.path(), "{ \"alpha\": 0.5,\n  \"domain\": [", &["identities"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("config.json:2:"), "{}", stderr(&o));
}

#[test]
fn reruns_are_byte_identical_and_seed_is_recorded() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        let o = run(d.path(), DEFAULT_1D, &["report"]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in [
        "identities.json",
        "accretivity.json",
        "range.csv",
        "sector.json",
        "eigenvalues.csv",
        "sandwich.json",
    ] {
        let x = fs::read(a.path().join("out").join(f)).unwrap();
        let y = fs::read(b.path().join("out").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs between runs");
    }
    let c = TempDir::new().unwrap();
    let o = run(c.path(), DEFAULT_1D, &["accretivity", "--seed", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&c.path().join("out/accretivity.json"));
    assert_eq!(v["seed"], 9);
    assert!(v["result"]["mu"].as_f64().unwrap() > 0.56);
    assert!(v["result"]["empirical_min"].as_f64().unwrap() >= v["result"]["mu"].as_f64().unwrap() - 1e-2);
}

#[test]
fn failing_check_exits_one_and_names_it() {
    let dir = TempDir::new().unwrap();
    let cfg = DEFAULT_1D.replace("\"seed\": 42,", "\"seed\": 42,\n  \"tolerances\": { \"inversion\": 1e-9 },");
    let o = run(dir.path(), &cfg, &["identities"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("inversion-left"), "{}", stderr(&o));
    let v = json(&dir.path().join("out/identities.json"));
    assert_eq!(v["pass"], false);
}

#[test]
fn disk_domains_skip_assembled_analyses() {
    let dir = TempDir::new().unwrap();
    let cfg = r#"{
  "domain": { "kind": "disk", "radius": 0.5, "directions": 8 },
  "alpha": 0.25,
  "grid": { "cells": 128 },
  "coefficients": { "rho": "2 - r" },
  "seed": 1,
  "analysis": { "boundedness_trials": 5, "trials": 20 }
}"#;
    let o = run(dir.path(), cfg, &["range"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("interval or box"));
    let o = run(dir.path(), cfg, &["report"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(dir.path().join("out/accretivity.json").exists());
    assert!(!dir.path().join("out/sandwich.json").exists());
}

#[test]
fn thread_cap_is_validated() {
    let dir = TempDir::new().unwrap();
    let o = run_env(dir.path(), DEFAULT_1D, &["identities"], &[("FRACSPEC_THREADS", "zero")]);
    assert_eq!(o.status.code(), Some(2));
    let o = run_env(dir.path(), DEFAULT_1D, &["identities"], &[("FRACSPEC_THREADS", "1")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}
