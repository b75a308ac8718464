use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn ncpoly(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ncpoly"))
        .args(args)
        .env_remove("NCPOLY_TOL")
        .output()
        .expect("binary runs")
}

fn run(args: &[&str]) -> (i32, Value) {
    let out = ncpoly(args);
    let code = out.status.code().expect("exit code");
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (code, json)
}

fn path(name: &str) -> String {
    fixture(name).display().to_string()
}

#[test]
fn validate_accepts_a_pvm() {
    let (code, v) = run(&["validate", &path("valid_pvm.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
    assert_eq!(v["kind"], "pvm");
}

#[test]
fn validate_names_the_completeness_violation() {
    let (code, v) = run(&["validate", &path("doubled_identity.json")]);
    assert_eq!(code, 1);
    let failed: Vec<&str> = v["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    assert_eq!(failed, ["completeness"]);
}

#[test]
fn truncated_json_is_a_usage_error() {
    let out = ncpoly(&["validate", &path("truncated.json")]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn missing_file_is_a_usage_error() {
    let (code, _) = run(&["validate", "/nonexistent/q.json"]);
    assert_eq!(code, 2);
}

#[test]
fn validate_other_artifacts() {
    for name in ["classical_table.json", "trine.json", "bell.json", "kernel.json"] {
        let (code, v) = run(&["validate", &path(name)]);
        assert_eq!(code, 0, "{name}");
        assert_eq!(v["pass"], true, "{name}");
    }
}

#[test]
fn compressed_dilation_of_a_pvm_is_square() {
    let (code, v) = run(&["dilate", &path("valid_pvm.json"), "--compress"]);
    assert_eq!(code, 0);
    assert_eq!(v["big_dim"], 2);
    assert!(v["max_reconstruction_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn dilation_writes_its_output_file() {
    let out = std::env::temp_dir().join(format!("ncpoly-dilation-{}.json", std::process::id()));
    let (code, v) = run(&["dilate", &path("trine.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["big_dim"], 6);
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    std::fs::remove_file(&out).ok();
    assert_eq!(written["big_dim"], 6);
    assert_eq!(written["blocks"]["t1"], serde_json::json!([2, 4]));
}

#[test]
fn full_and_empty_events_give_trivial_spectra() {
    let (code, v) = run(&["rn", &path("classical_table.json"), "--B", "*"]);
    assert_eq!(code, 0);
    for x in v["gamma_spectrum"].as_array().unwrap() {
        assert!((x.as_f64().unwrap() - 1.0).abs() < 1e-9);
    }
    let (code, v) = run(&["rn", &path("classical_table.json"), "--B", "{}"]);
    assert_eq!(code, 0);
    for x in v["gamma_spectrum"].as_array().unwrap() {
        assert!(x.as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn classical_table_conditionals() {
    // rows a0..a2, columns b0, b1: weights 0.1 0.2 / 0 0 / 0.45 0.25
    let (code, v) = run(&["rn", &path("classical_table.json"), "--B", "b0"]);
    assert_eq!(code, 0);
    let c = &v["atom_conditionals"];
    assert!((c["a0"].as_f64().unwrap() - 0.1 / 0.3).abs() < 1e-10);
    assert!(c["a1"].is_null());
    assert!((c["a2"].as_f64().unwrap() - 0.45 / 0.7).abs() < 1e-10);
    let (code, v) = run(&["rn", &path("classical_table.json"), "--B", "a2", "--side", "left"]);
    assert_eq!(code, 0);
    let c = &v["atom_conditionals"];
    assert!((c["b0"].as_f64().unwrap() - 0.45 / 0.55).abs() < 1e-10);
    assert!((c["b1"].as_f64().unwrap() - 0.25 / 0.45).abs() < 1e-10);
}

#[test]
fn rn_rejects_bad_labels_and_non_products() {
    assert_eq!(run(&["rn", &path("classical_table.json"), "--B", "zz"]).0, 2);
    assert_eq!(run(&["rn", &path("trine.json"), "--B", "t0"]).0, 1);
}

#[test]
fn suite_report_schema() {
    let (code, v) = run(&["suite", "--seed", "1", "--trials", "1"]);
    assert_eq!(code, 0);
    assert_eq!(v["pass"], true);
    assert_eq!(v["config"]["seed"], 1);
    assert_eq!(v["config"]["trials"], 1);
    let props = v["properties"].as_array().unwrap();
    assert!(props.len() >= 30);
    for p in props {
        for key in ["name", "module", "trials", "passed", "failed", "worst_residual", "failure"] {
            assert!(p.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn suite_is_deterministic() {
    let args = ["suite", "--seed", "99", "--trials", "3", "--only", "qpoly", "--only", "dilation"];
    let (_, a) = run(&args);
    let (_, b) = run(&args);
    assert_eq!(a, b);
    assert!(a["properties"].as_array().unwrap().iter().all(|p| {
        let name = p["name"].as_str().unwrap();
        name.contains("qpoly") || name.contains("dilation")
    }));
}

#[test]
fn tolerance_must_be_positive() {
    assert_eq!(run(&["--tol", "-1", "validate", &path("trine.json")]).0, 2);
    let out = Command::new(env!("CARGO_BIN_EXE_ncpoly"))
        .args(["validate", &path("trine.json")])
        .env("NCPOLY_TOL", "1e-6")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn demos_run_and_unknown_names_fail() {
    for name in ["classical-bayes", "naimark", "disintegration", "tensor", "link-kernels", "entangled-marginals"] {
        assert_eq!(ncpoly(&["demo", name]).status.code(), Some(0), "{name}");
    }
    let out = ncpoly(&["demo", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("naimark"));
}
