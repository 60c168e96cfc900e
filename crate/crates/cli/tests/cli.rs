//! End-to-end binary tests: config parsing, exit codes, artifacts, and
//! byte-identical reruns across worker counts.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_linproc"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("linproc-cli-{name}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, contents: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, contents).unwrap();
    path
}

fn run_to(dir: &Path, config: &Path, extra: &[&str]) -> Output {
    bin()
        .arg("run")
        .arg(config)
        .arg("--out")
        .arg(dir)
        .args(extra)
        .output()
        .unwrap()
}

const SMALL_CLT: &str = r#"{
  "schema_version": 1,
  "experiment": "clt",
  "model": { "kind": "iid", "distribution": "standard-normal" },
  "weights": { "kind": "partial-sum-delta" },
  "n": 64,
  "replicates": 400,
  "master_seed": 2,
  "rel_tail_tol": 1e-9,
  "target": { "kind": "normal", "variance": 1.0 },
  "dump_replicates": true
}"#;

#[test]
fn clt_run_writes_passing_report() {
    let dir = scratch("clt");
    let config = write_config(&dir, SMALL_CLT);
    let out = run_to(&dir, &config, &[]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("[clt]") && stdout.contains("PASS"), "{stdout}");
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
    assert!(report.get("runtime_ms").is_none(), "runtime must live in meta.json");
    assert!(dir.join("meta.json").exists());
    let csv = std::fs::read_to_string(dir.join("replicates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 401);
    assert_eq!(csv.lines().next(), Some("value"));
}

#[test]
fn reruns_are_byte_identical_across_workers() {
    let dir1 = scratch("det1");
    let dir2 = scratch("det2");
    let config1 = write_config(&dir1, SMALL_CLT);
    let config2 = write_config(&dir2, SMALL_CLT);
    let out1 = run_to(&dir1, &config1, &["--workers", "1"]);
    let out2 = run_to(&dir2, &config2, &["--workers", "4"]);
    assert!(out1.status.success() && out2.status.success());
    let r1 = std::fs::read(dir1.join("report.json")).unwrap();
    let r2 = std::fs::read(dir2.join("report.json")).unwrap();
    assert_eq!(r1, r2, "reports must not depend on the worker count");
    let c1 = std::fs::read(dir1.join("replicates.csv")).unwrap();
    let c2 = std::fs::read(dir2.join("replicates.csv")).unwrap();
    assert_eq!(c1, c2);
}

#[test]
fn seed_flag_overrides_config() {
    let dir1 = scratch("seed1");
    let dir2 = scratch("seed2");
    let config1 = write_config(&dir1, SMALL_CLT);
    let config2 = write_config(&dir2, SMALL_CLT);
    let out1 = run_to(&dir1, &config1, &[]);
    let out2 = run_to(&dir2, &config2, &["--seed", "31415"]);
    assert!(out1.status.success() && out2.status.success());
    let r1 = std::fs::read(dir1.join("report.json")).unwrap();
    let r2 = std::fs::read(dir2.join("report.json")).unwrap();
    assert_ne!(r1, r2, "a different master seed must change the report");
}

#[test]
fn unknown_field_is_status_two() {
    let dir = scratch("badfield");
    let config = write_config(
        &dir,
        r#"{ "schema_version": 1, "experiment": "clt", "wat": 3 }"#,
    );
    let out = run_to(&dir, &config, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("wat"), "diagnostic should name the field: {err}");
}

#[test]
fn malformed_json_reports_line_and_column() {
    let dir = scratch("badjson");
    let config = write_config(&dir, "{ \"schema_version\": 1,\n  broken\n}");
    let out = run_to(&dir, &config, &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn uncertifiable_truncation_is_status_three() {
    let dir = scratch("trunc");
    let config = write_config(
        &dir,
        r#"{
          "schema_version": 1,
          "experiment": "clt",
          "model": { "kind": "iid" },
          "weights": { "kind": "power-decay", "beta": 0.51 },
          "n": 256,
          "replicates": 50,
          "master_seed": 1,
          "rel_tail_tol": 1e-6,
          "target": { "kind": "normal", "variance": 1.0 }
        }"#,
    );
    let out = run_to(&dir, &config, &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("truncation not certified"), "{err}");
}

#[test]
fn failed_check_is_status_one() {
    // Wrong target variance: KS must reject.
    let dir = scratch("fail");
    let config = write_config(
        &dir,
        r#"{
          "schema_version": 1,
          "experiment": "clt",
          "model": { "kind": "iid" },
          "weights": { "kind": "partial-sum-delta" },
          "n": 64,
          "replicates": 800,
          "master_seed": 5,
          "target": { "kind": "normal", "variance": 9.0 }
        }"#,
    );
    let out = run_to(&dir, &config, &[]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
}

#[test]
fn counterexample_run_composes_verdicts() {
    let dir = scratch("counter");
    let config = write_config(
        &dir,
        r#"{
          "schema_version": 1,
          "experiment": "counterexample",
          "psi": { "kind": "inverse-log" },
          "cutoff": 100000,
          "k_max": 48
        }"#,
    );
    let out = run_to(&dir, &config, &[]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["projective"]["verdict"], "violated");
    assert_eq!(report["maxwell_woodroofe_psi_weighted"]["verdict"], "satisfied");
    assert_eq!(report["spectral_verdict"], "possibly-unbounded");
    assert_eq!(report["eq2"]["verdict"], "violated");
    assert_eq!(report["pass"], serde_json::Value::Bool(true));
}

#[test]
fn lemmas_run_emits_trace_and_summary() {
    let dir = scratch("lemmas");
    let config = write_config(
        &dir,
        r#"{
          "schema_version": 1,
          "experiment": "lemmas",
          "weights": { "kind": "power-decay", "beta": 0.7 },
          "n_list": [64, 256, 1024],
          "block_size": 8,
          "rel_tail_tol": 0.05,
          "wu_trials": 50,
          "master_seed": 90210
        }"#,
    );
    let out = run_to(&dir, &config, &[]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,r1,r2,s1,s2"));
    assert_eq!(csv.lines().count(), 4);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["wu_all_hold"], serde_json::Value::Bool(true));
}

#[test]
fn conditions_expectation_mismatch_is_status_one() {
    let dir = scratch("condfail");
    let config = write_config(
        &dir,
        r#"{
          "schema_version": 1,
          "experiment": "conditions",
          "checks": [
            {
              "condition": "eq4-projective",
              "model": { "kind": "iid" },
              "expect": "violated"
            }
          ]
        }"#,
    );
    let out = run_to(&dir, &config, &[]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn variance_trace_run_matches_target() {
    let dir = scratch("vtrace");
    let config = write_config(
        &dir,
        r#"{
          "schema_version": 1,
          "experiment": "variance-trace",
          "model": { "kind": "causal-linear", "u": { "kind": "geometric", "rho": 0.5 } },
          "weights": { "kind": "partial-sum-delta" },
          "n_list": [256, 1024],
          "rel_tail_tol": 1e-9,
          "k_max": 128,
          "target_tolerance": 0.02
        }"#,
    );
    let out = run_to(&dir, &config, &[]);
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("n,ratio,target,rel_err"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap();
    assert!((report["target"].as_f64().unwrap() - 4.0).abs() < 1e-9);
}

#[test]
fn list_models_prints_catalog() {
    let out = bin().arg("list-models").output().unwrap();
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("causal-linear"));
    assert!(stdout.contains("nonergodic-scale"));
    assert!(stdout.contains("x^{-p}[1+log(2/x)]^{-a} sin(1/x)"));
}
