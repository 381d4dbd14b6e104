//! End-to-end tests of the `fsbm` binary: exit codes, report artifacts,
//! and byte-level reproducibility.

use std::path::Path;
use std::process::{Command, Output};

fn fsbm() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fsbm"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn small_config(sampler: &str) -> String {
    format!(
        r#"{{
  "dim": 2,
  "direction_count": 32,
  "alpha_levels": [1.0, 0.6, 0.3],
  "times": [0.0, 0.25, 0.5, 1.0],
  "n_samples": 3000,
  "seed": 42,
  "covariance_scale": 1.0,
  "functional_count": 6,
  "workers": 2,
  "sampler": {sampler},
  "path_count": 2,
  "selftest_instances": 120
}}"#
    )
}

fn run(args: &[&str]) -> Output {
    fsbm().args(args).output().expect("binary runs")
}

#[test]
fn selftest_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "cfg.json", &small_config(r#"{"kind": "bm"}"#));
    let out = dir.path().join("out");
    let result = run(&[
        "selftest",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    assert!(out.join("selftest_report.json").exists());
    assert!(out.join("run_meta.json").exists());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("support_additivity: PASS"));
}

#[test]
fn malformed_config_exits_two_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "bad.json", r#"{"dim": "two"}"#);
    let result = run(&["verify", "--config", config.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&result.stderr).is_empty());

    let missing = dir.path().join("nope.json");
    let result = run(&["verify", "--config", missing.to_str().unwrap()]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn verify_on_brownian_sampler_passes() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "cfg.json", &small_config(r#"{"kind": "bm"}"#));
    let out = dir.path().join("out");
    let result = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--format",
        "csv",
    ]);
    assert_eq!(
        result.status.code(),
        Some(0),
        "stdout: {} stderr: {}",
        String::from_utf8_lossy(&result.stdout),
        String::from_utf8_lossy(&result.stderr)
    );
    assert!(out.join("verify_report.json").exists());
    let csv = std::fs::read_to_string(out.join("verify_report.csv")).unwrap();
    assert!(csv.starts_with("test,functional,t,s,estimate,se,target,pass"));
}

#[test]
fn degeneracy_fails_on_translated_square_with_step1_failure() {
    let dir = tempfile::tempdir().unwrap();
    let sampler = r#"{"kind": "translate", "nu": {"type": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0]}}"#;
    let config = write_config(dir.path(), "cfg.json", &small_config(sampler));
    let out = dir.path().join("out");
    let result = run(&[
        "degeneracy",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
    let report = std::fs::read_to_string(out.join("degeneracy_report.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&report).unwrap();
    assert_eq!(value["pass"], serde_json::Value::Bool(false));
    let step1_failures = value["rows"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|r| r["name"] == "step1_mean_surface" && r["pass"] == false)
        .count();
    assert!(step1_failures > 0, "no STEP 1 failure recorded");
}

#[test]
fn degeneracy_passes_on_brownian() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "cfg.json", &small_config(r#"{"kind": "bm"}"#));
    let out = dir.path().join("out");
    let result = run(&[
        "degeneracy",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0));
}

#[test]
fn identical_runs_produce_byte_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "cfg.json", &small_config(r#"{"kind": "bm"}"#));
    let out1 = dir.path().join("out1");
    let out2 = dir.path().join("out2");
    for out in [&out1, &out2] {
        let result = run(&[
            "verify",
            "--config",
            config.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(result.status.code(), Some(0));
    }
    let a = std::fs::read(out1.join("verify_report.json")).unwrap();
    let b = std::fs::read(out2.join("verify_report.json")).unwrap();
    assert_eq!(a, b, "report content must be byte-identical");
}

#[test]
fn seed_override_changes_report_content() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "cfg.json", &small_config(r#"{"kind": "bm"}"#));
    let out1 = dir.path().join("out1");
    let out2 = dir.path().join("out2");
    let base = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out1.to_str().unwrap(),
    ]);
    assert_eq!(base.status.code(), Some(0));
    let reseeded = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out2.to_str().unwrap(),
        "--seed",
        "43",
    ]);
    assert_eq!(reseeded.status.code(), Some(0));
    let a = std::fs::read(out1.join("verify_report.json")).unwrap();
    let b = std::fs::read(out2.join("verify_report.json")).unwrap();
    assert_ne!(a, b);
}

#[test]
fn simulate_writes_driver_csv_and_fuzzy_json() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "cfg.json", &small_config(r#"{"kind": "bm"}"#));
    let out = dir.path().join("out");
    let result = run(&[
        "simulate",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("wiener_0000.csv")).unwrap();
    assert!(csv.starts_with("time,x0,x1"));
    let json = std::fs::read_to_string(out.join("fuzzy_path_0000.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(value["times"].as_array().unwrap().len(), 4);
    assert!(out.join("wiener_0001.csv").exists());
}

#[test]
fn report_merges_and_propagates_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "cfg.json", &small_config(r#"{"kind": "bm"}"#));
    let out = dir.path().join("out");
    let ok = run(&[
        "verify",
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(ok.status.code(), Some(0));

    let merged_out = dir.path().join("merged");
    let result = run(&[
        "report",
        out.join("verify_report.json").to_str().unwrap(),
        "--out",
        merged_out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(0));
    let merged =
        std::fs::read_to_string(merged_out.join("merged_report.json")).unwrap();
    let value: serde_json::Value = serde_json::from_str(&merged).unwrap();
    assert_eq!(value["all_pass"], serde_json::Value::Bool(true));

    // A failing report makes the merge fail.
    let failing = dir.path().join("failing.json");
    std::fs::write(&failing, r#"{"test": "stub", "pass": false}"#).unwrap();
    let result = run(&[
        "report",
        out.join("verify_report.json").to_str().unwrap(),
        failing.to_str().unwrap(),
        "--out",
        merged_out.to_str().unwrap(),
    ]);
    assert_eq!(result.status.code(), Some(1));
}
