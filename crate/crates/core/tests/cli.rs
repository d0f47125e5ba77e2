mod common;

use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

use common::{bin, model_path};

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn run_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(bin())
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn path(name: &str) -> String {
    model_path(name).to_string_lossy().into_owned()
}

#[test]
fn verify_lemmas_default_is_clean() {
    let o = run(&["verify-lemmas"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&o);
    assert_eq!(r["violations"], 0);
    assert_eq!(r["lemmas"].as_array().unwrap().len(), 5);
    let total: u64 = r["lemmas"].as_array().unwrap().iter().map(|l| l["checked"].as_u64().unwrap()).sum();
    assert_eq!(r["total_tuples"].as_u64().unwrap(), total);
}

#[test]
fn verify_lemmas_writes_the_report_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let o = run(&[
        "verify-lemmas",
        "--p",
        "2,3",
        "--L-max",
        "3",
        "--n-max",
        "500",
        "--K-max",
        "2",
        "--jobs",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let r: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(r["config"]["primes"], serde_json::json!([2, 3]));
    assert_eq!(r["violations"], 0);
}

#[test]
fn verify_lemmas_rejects_bad_configs() {
    assert_eq!(code(&run(&["verify-lemmas", "--p", ""])), 2);
    assert_eq!(code(&run(&["verify-lemmas", "--p", "4"])), 2);
    assert_eq!(code(&run(&["verify-lemmas", "--p", "2", "--L-max", "20"])), 2);
}

#[test]
fn corrupted_tau_reports_counterexamples() {
    let o =
        run(&["--mutate", "tau-offset", "verify-lemmas", "--p", "2", "--L-max", "3", "--n-max", "100", "--K-max", "1"]);
    assert_eq!(code(&o), 1);
    let r = json(&o);
    assert!(r["violations"].as_u64().unwrap() > 0);
    let bad = r["lemmas"].as_array().unwrap().iter().find(|l| l["violations"].as_u64().unwrap() > 0).unwrap();
    assert!(!bad["counterexamples"].as_array().unwrap().is_empty());
}

#[test]
fn unknown_mutation_is_a_usage_error() {
    assert_eq!(code(&run(&["--mutate", "nope", "verify-lemmas"])), 2);
}

#[test]
fn pipeline_pinned_example() {
    let o = run(&["pipeline", r#"{"f": ["1", "0", "-1"], "z": "3", "x": "1", "y": "2"}"#]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["g"]["coefficients"], serde_json::json!(["1", "-6", "8"]));
    assert_eq!(r["h"]["coefficients"], serde_json::json!(["1", "-3", "2"]));
    assert_eq!(r["verified"], true);
}

#[test]
fn pipeline_with_y_one_has_h_equal_g() {
    let o = run_stdin(&["pipeline", "-"], r#"{"f": ["1", "2/3", "-5", "7"], "z": "1/2", "x": "-3", "y": "1"}"#);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["g"], r["h"]);
    assert_eq!(r["verified"], true);
}

#[test]
fn pipeline_usage_errors() {
    assert_eq!(code(&run(&["pipeline", "{not json"])), 2);
    assert_eq!(code(&run(&["pipeline", r#"{"f": ["2", "1"], "z": "1", "x": "1", "y": "1"}"#])), 2);
    assert_eq!(code(&run(&["pipeline", r#"{"f": ["1", "1"], "z": "1", "x": "1", "y": "0"}"#])), 2);
    assert_eq!(code(&run(&["pipeline", r#"{"f": ["1", "1"], "z": "1", "x": "1", "y": "1", "w": "2"}"#])), 2);
}

#[test]
fn validate_model_accepts_bundled_and_rejects_broken() {
    for name in ["regular_p2", "case2_fixture", "case3_fixture"] {
        let o = run(&["validate-model", "--model", &path(name)]);
        assert_eq!(code(&o), 0, "{name}");
        let r = json(&o);
        assert_eq!(r["valid"], true);
        assert!(r["effective_precision"].is_u64());
    }
    let dir = tempfile::tempdir().unwrap();
    let mut file: Value = serde_json::from_str(&std::fs::read_to_string(model_path("case2_fixture")).unwrap()).unwrap();
    file["elements"]["sigma"] = file["elements"]["one"].clone();
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, file.to_string()).unwrap();
    assert_eq!(code(&run(&["validate-model", "--model", broken.to_str().unwrap()])), 1);
    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "[1, 2").unwrap();
    assert_eq!(code(&run(&["validate-model", "--model", garbage.to_str().unwrap()])), 2);
}

#[test]
fn run_regular_model_matches_golden_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trace.json");
    let o = run(&["run", "--model", &path("regular_p2"), "--K", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = json(&o);
    assert_eq!(summary["terminated"], true);
    assert_eq!(summary["all_pass"], true);
    let trace = std::fs::read_to_string(&out).unwrap();
    let golden = std::fs::read_to_string(common::models_dir().join("regular_p2_trace.json")).unwrap();
    assert_eq!(trace, golden);
    let steps: Value = serde_json::from_str(&trace).unwrap();
    let last = steps.as_array().unwrap().last().unwrap();
    assert_eq!(last["i"].as_u64().unwrap(), 2u64.pow(last["L_i"].as_u64().unwrap() as u32));
}

#[test]
fn run_case3_fixture_hits_the_step_limit() {
    let o = run(&["run", "--model", &path("case3_fixture"), "--max-steps", "3"]);
    assert_eq!(code(&o), 1);
    let summary = json(&o);
    assert_eq!(summary["terminated"], false);
    assert_eq!(summary["case3_count"], 1);
    assert!(summary["error"].as_str().unwrap().contains("step limit"));
}

#[test]
fn run_missing_model_is_a_usage_error() {
    assert_eq!(code(&run(&["run", "--model", "/nonexistent/model.json"])), 2);
}

#[test]
fn koszul_and_stabilize_report_precision() {
    let o = run(&["koszul", "--model", &path("case3_fixture"), "--N", "1"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert!(r["effective_precision"].is_u64());
    assert!(r["h1_invariants"].is_array());

    let o = run(&["stabilize", "--model", &path("case3_fixture"), "--N", "1", "--from", "2", "--to", "2"]);
    assert_eq!(code(&o), 0);
    let r = json(&o);
    assert_eq!(r["injective"], true);
    assert_eq!(r["surjective"], true);
    assert!(r["effective_precision"].is_u64());

    let o = run(&["stabilize", "--model", &path("case3_fixture"), "--N", "9", "--from", "1", "--to", "2"]);
    assert_eq!(code(&o), 1);
}
