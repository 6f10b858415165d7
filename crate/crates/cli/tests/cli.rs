use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ctrlsel::lti::{load_system, SystemFormat};
use serde_json::Value;
use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctrlsel")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}", String::from_utf8_lossy(&out.stdout))
    })
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_owned()
}

const DIAG3: &str = r#"{
  "A": [[-1, 0, 0], [0, -2, 0], [0, 0, -3]],
  "candidates": [
    {"id": "e1", "column": [1, 0, 0]},
    {"id": "e2", "column": [0, 1, 0]},
    {"id": "e3", "column": [0, 0, 1]}
  ]
}"#;

fn randsys(dir: &Path, n: usize, seed: u64) -> String {
    let path = dir.join(format!("rand{n}.json"));
    let out = run(&["randsys", "--n", &n.to_string(), "--seed", &seed.to_string(), "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    path.to_str().unwrap().to_owned()
}

#[test]
fn randsys_output_loads() {
    let dir = TempDir::new().unwrap();
    let path = randsys(dir.path(), 25, 1);
    let sys = load_system(Path::new(&path), SystemFormat::Json, None).unwrap();
    assert_eq!(sys.n(), 25);
    assert_eq!(sys.num_candidates(), 25);
    assert!(sys.abscissa() <= -0.5 + 1e-9);
}

#[test]
fn place_trace_on_diagonal_system() {
    let dir = TempDir::new().unwrap();
    let sys = write(dir.path(), "diag3.json", DIAG3);
    let out = run(&["place", "--system", &sys, "--metric", "trace", "--k", "2"]);
    // two of three states reached: selection is valid but uncontrollable
    assert_eq!(code(&out), 3);
    let v = json(&out);
    assert_eq!(v["selected"], serde_json::json!(["e1", "e2"]));
    assert_eq!(v["controllable"], false);
    assert!((v["value"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!(v["certified_upper_bound"].as_f64().unwrap() >= 0.75);
}

#[test]
fn place_two_stage_logdet_on_random_system() {
    let dir = TempDir::new().unwrap();
    let sys = randsys(dir.path(), 25, 1);
    let out = run(&["place", "--system", &sys, "--metric", "logdet", "--k", "7", "--two-stage", "--volume-mode", "standard-sqrt"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["selected"].as_array().unwrap().len(), 7);
    assert!(v["value"].as_f64().unwrap().is_finite());
    assert_eq!(v["trace"][0]["stage"], "rank");
    assert!(v["volume"].as_f64().unwrap() > 0.0);
    let lazy = run(&["place", "--system", &sys, "--metric", "logdet", "--k", "7", "--two-stage", "--lazy"]);
    assert_eq!(json(&lazy)["selected"], v["selected"]);
}

#[test]
fn place_lambda_min_carries_no_guarantee() {
    let out = run(&["place", "--system", "counterexample", "--metric", "lambda-min", "--k", "2"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["guarantee"], "none (metric not submodular)");
    assert!(v["certified_upper_bound"].is_null());
}

#[test]
fn place_output_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let sys = randsys(dir.path(), 12, 3);
    let args = ["place", "--system", &sys, "--metric", "trace-inv", "--k", "4", "--two-stage"];
    assert_eq!(run(&args).stdout, run(&args).stdout);
}

#[test]
fn counterexample_reports_computed_gains() {
    let out = run(&["counterexample", "--json"]);
    let v = json(&out);
    assert_eq!(v["violated"], true);
    let gains = [&v["gain_b3_given_b1"], &v["gain_b3_given_b1b2"], &v["gain_b3_given_b2"]];
    let want = [0.036928565442928, 0.032485377482840, 0.001067861381785];
    for (g, w) in gains.iter().zip(want) {
        assert!((g.as_f64().unwrap() - w).abs() < 1e-12);
    }
    // the middle gain sits 5.1e-4 from its printed value, outside ±5e-4
    assert_eq!(v["gain_matches"], serde_json::json!([true, false, true]));
    assert_eq!(code(&out), 4);
    let human = run(&["counterexample"]);
    assert!(String::from_utf8_lossy(&human.stdout).contains("violated: true"));
}

#[test]
fn tampered_counterexample_fails() {
    let out = run(&["counterexample", "--tamper", "--json"]);
    assert_eq!(code(&out), 4);
    assert_eq!(json(&out)["matches"], false);
}

#[test]
fn verify_modes() {
    let dir = TempDir::new().unwrap();
    let sys = randsys(dir.path(), 10, 1);
    let out = run(&["verify", "--system", &sys, "--metric", "logdet", "--trials", "1000", "--seed", "42"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["trials"], 1000);
    assert_eq!(v["violations"].as_array().unwrap().len(), 0);

    let out = run(&["verify", "--system", &sys, "--metric", "trace", "--trials", "300"]);
    assert_eq!(code(&out), 0);
    assert!(json(&out)["max_modularity_gap"].as_f64().unwrap() <= 1e-9);

    let out = run(&["verify", "--system", "counterexample", "--metric", "lambda-min", "--exhaustive"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["expectation"], "violation-expected");
    assert!(!v["violations"].as_array().unwrap().is_empty());
}

#[test]
fn brute_tables_and_summary() {
    let dir = TempDir::new().unwrap();
    let sys = write(dir.path(), "diag3.json", DIAG3);
    let csv = dir.path().join("table.csv");
    let hist = dir.path().join("hist.csv");
    let out = run(&[
        "brute", "--system", &sys, "--metric", "logdet", "--k", "3",
        "--out", csv.to_str().unwrap(), "--emit-histogram", hist.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["rows"], 1);
    assert_eq!(v["shifted_ratio"], 1.0);
    assert_eq!(v["percentile"], 0.0);
    let table = fs::read_to_string(&csv).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "subset;value");
    assert!(lines[1].starts_with("e1+e2+e3;"));
    assert!(fs::read_to_string(&hist).unwrap().starts_with("lower;upper;count"));
}

#[test]
fn brute_guard_exit_code() {
    let dir = TempDir::new().unwrap();
    let sys = randsys(dir.path(), 40, 1);
    let out = run(&["brute", "--system", &sys, "--k", "10"]);
    assert_eq!(code(&out), 6);
}

#[test]
fn energy_scalar_and_two_state() {
    let dir = TempDir::new().unwrap();
    let sys = write(dir.path(), "int.json", r#"{"A": [[0]], "B0": [[1]]}"#);
    let target = write(dir.path(), "x1.json", "[1]");
    let out = run(&["energy", "--system", &sys, "--horizon", "1", "--target", &target]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!((v["energy"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(v["samples"].as_array().unwrap().len(), 101);

    let sys = write(
        dir.path(),
        "osc.json",
        r#"{"A": [[0, 1], [-2, -3]], "candidates": [{"id": "u", "column": [0, 1]}]}"#,
    );
    let target = write(dir.path(), "x2.txt", "1, -1");
    let out = run(&["energy", "--system", &sys, "--select", "u", "--horizon", "2", "--target", &target]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert!(v["endpoint_error"].as_f64().unwrap() <= 1e-6 * 2f64.sqrt());
    let rel = (v["realized_energy"].as_f64().unwrap() / v["energy"].as_f64().unwrap() - 1.0).abs();
    assert!(rel <= 1e-6);
}

#[test]
fn energy_rejects_unreachable_target() {
    let dir = TempDir::new().unwrap();
    let sys = write(dir.path(), "dec.json", r#"{"A": [[-1, 0], [0, -2]], "B0": [[1, 0]]}"#);
    let target = write(dir.path(), "x.json", "[1, 1]");
    let out = run(&["energy", "--system", &sys, "--horizon", "1", "--target", &target]);
    assert_eq!(code(&out), 3);
}

#[test]
fn csv_pair_systems_load() {
    let dir = TempDir::new().unwrap();
    let a = write(dir.path(), "A.csv", "-1,0\n0,-2\n");
    let c = write(dir.path(), "cands.csv", "p,q\n1,0\n0,1\n");
    let out = run(&["place", "--system", &format!("{a},{c}"), "--metric", "rank", "--k", "2"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["selected"], serde_json::json!(["p", "q"]));
}

#[test]
fn input_errors_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(code(&run(&["place", "--system", &bad, "--k", "1"])), 1);
    let unstable = write(dir.path(), "unstable.json", r#"{"A": [[1]], "candidates": [{"id": "a", "column": [1]}]}"#);
    assert_eq!(code(&run(&["place", "--system", &unstable, "--k", "1"])), 1);
    assert_eq!(code(&run(&["place", "--system", "counterexample", "--metric", "nope", "--k", "1"])), 1);
    assert_eq!(code(&run(&["place", "--system", "counterexample", "--k", "9"])), 1);
}

#[test]
fn weighted_logdet_needs_full_row_rank_weight() {
    let dir = TempDir::new().unwrap();
    let sys = write(dir.path(), "diag3.json", DIAG3);
    let q = write(dir.path(), "q.csv", "1,0,0\n0,1,0\n");
    let out = run(&["place", "--system", &sys, "--metric", "weighted-logdet", "--weight", &q, "--k", "2"]);
    // Q projects onto the first two states, which e1 and e2 reach
    assert_eq!(json(&out)["selected"], serde_json::json!(["e1", "e2"]));
    assert!(json(&out)["value"].as_f64().unwrap().is_finite());
    let q = write(dir.path(), "q0.csv", "1,0,0\n2,0,0\n");
    let out = run(&["place", "--system", &sys, "--metric", "weighted-logdet", "--weight", &q, "--k", "2"]);
    assert_eq!(code(&out), 1);
    let out = run(&["place", "--system", &sys, "--metric", "weighted-logdet", "--k", "2"]);
    assert_eq!(code(&out), 1);
}
