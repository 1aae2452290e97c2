use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn ltlx(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltlx")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn explain_reports_a_pac_formula() {
    let out = ltlx(&["explain", "--acceptor", "ltl:F(a)", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["outcome"]["kind"], "PacPass");
    assert_eq!(report["outcome"]["formula"], "F(a)");
    assert_eq!(report["outcome"]["size"], 2);
    assert_eq!(report["accuracy"], 1.0);
    assert_eq!(report["iterations"][0]["r_i"], 74);
    assert!(report["eval_suite_hash"].as_str().unwrap().len() == 64);
}

#[test]
fn explain_is_deterministic_per_seed() {
    let a = ltlx(&["explain", "--acceptor", "builtin:email", "--seed", "5", "--timeout-secs", "60"]);
    let b = ltlx(&["explain", "--acceptor", "builtin:email", "--seed", "5", "--timeout-secs", "60"]);
    let strip = |v: Value| {
        let iters: Vec<Value> = v["iterations"]
            .as_array()
            .unwrap()
            .iter()
            .map(|i| serde_json::json!([i["conjecture"], i["r_i"], i["mismatches"], i["counterexamples"]]))
            .collect();
        (iters, v["outcome"]["formula"].clone(), v["eval_suite_hash"].clone())
    };
    assert_eq!(strip(json(&a)), strip(json(&b)));
}

#[test]
fn iteration_limit_exits_with_early_stop() {
    let out = ltlx(&["explain", "--acceptor", "ltl:F(a & X(b))", "--max-iterations", "1", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let report = json(&out);
    assert_eq!(report["outcome"]["kind"], "EarlyStop");
    assert_eq!(report["outcome"]["r_i"], 74);
    assert!(report["outcome"]["epsilon_prime"].as_f64().unwrap() > 0.0);
    assert!(report["outcome"]["vacuous"].is_boolean());
}

#[test]
fn bad_arguments_exit_with_one() {
    assert_eq!(ltlx(&["explain", "--acceptor", "nope"]).status.code(), Some(1));
    assert_eq!(ltlx(&["explain", "--acceptor", "ltl:F(a)", "--query", "F(z)"]).status.code(), Some(1));
    assert_eq!(ltlx(&["explain", "--acceptor", "ltl:F(a)", "--dist", "poisson"]).status.code(), Some(1));
}

#[test]
fn out_file_and_counterexample_log() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let log = dir.path().join("ce.jsonl");
    let out = ltlx(&[
        "explain",
        "--acceptor",
        "ltl:F(a & X(b))",
        "--seed",
        "2",
        "--out",
        report.to_str().unwrap(),
        "--ce-log",
        log.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(parsed["outcome"]["kind"], "PacPass");
    let lines = std::fs::read_to_string(&log).unwrap();
    assert!(lines.lines().count() > 0);
    for line in lines.lines() {
        serde_json::from_str::<Value>(line).unwrap();
    }
}

#[test]
fn eval_scores_a_given_formula() {
    let out = ltlx(&["eval", "--acceptor", "ltl:F(a)", "--formula", "F(a)", "--test-size", "300"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["accuracy"], 1.0);
    assert_eq!(report["test_size"], 300);

    let out = ltlx(&["eval", "--acceptor", "ltl:F(a)", "--formula", "F(b)", "--test-size", "300"]);
    assert!(json(&out)["accuracy"].as_f64().unwrap() < 1.0);
}

#[test]
fn compare_runs_both_learners_on_one_suite() {
    let out = ltlx(&["compare", "--acceptor", "ltl:F(a)", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report = json(&out);
    assert_eq!(report["ltl"]["size"], 2);
    assert_eq!(report["dfa"]["states"], 2);
    assert_eq!(report["shared_suite"], true);
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn bench_writes_csv_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let out = ltlx(&["bench", "--suite", "synthetic", "--rows", "0,1", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("results.csv"));
    assert_eq!(csv.lines().count(), 3, "{csv}");
    let rows: Value = serde_json::from_str(&read(&dir.path().join("results.json"))).unwrap();
    assert_eq!(rows["rows"].as_array().map(Vec::len), Some(2));
    assert_eq!(rows["rows"][0]["pac_rate"], 1.0);
}
