use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn cfcheck(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfcheck"))
        .args(args)
        .env_remove("CFCHECK_SEED")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        let w = Self { dir: TempDir::new().unwrap() };
        std::fs::write(w.path("grid.json"), r#"{ "gridworld": "benchmark" }"#).unwrap();
        w
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_str().unwrap().to_string()
    }

    /// Simulates `count` traces of 11 states under `policy` into `name`.
    fn simulate(&self, name: &str, policy: &str, count: usize, seed: u64) {
        let o = cfcheck(&[
            "simulate", "--model", &self.arg("grid.json"), "--policy", policy, "--length", "11",
            "--count", &count.to_string(), "--seed", &seed.to_string(), "--out", &self.arg(name),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
}

fn traces(path: &Path) -> Vec<Value> {
    serde_json::from_str::<Value>(&std::fs::read_to_string(path).unwrap()).unwrap().as_array().unwrap().clone()
}

fn states(trace: &Value) -> Vec<String> {
    trace["steps"].as_array().unwrap().iter().map(|s| s["state"].as_str().unwrap().to_string()).collect()
}

#[test]
fn simulate_writes_requested_number_of_traces() {
    let w = Workspace::new();
    w.simulate("t.json", "rand", 100, 1);
    let t = traces(&w.path("t.json"));
    assert_eq!(t.len(), 100);
    assert!(t.iter().all(|x| x["policy"] == "rand" && states(x).len() == 11 && states(x)[0] == "r0c0"));

    w.simulate("none.json", "rand", 0, 1);
    assert!(traces(&w.path("none.json")).is_empty());
}

#[test]
fn simulate_is_deterministic_and_seed_sensitive() {
    let w = Workspace::new();
    w.simulate("a.json", "rand", 20, 7);
    w.simulate("b.json", "rand", 20, 7);
    w.simulate("c.json", "rand", 20, 8);
    let read = |n| std::fs::read(w.path(n)).unwrap();
    assert_eq!(read("a.json"), read("b.json"));
    assert_ne!(read("a.json"), read("c.json"));
}

#[test]
fn unknown_policy_is_a_usage_error_listing_names() {
    let w = Workspace::new();
    let o = cfcheck(&["simulate", "--model", &w.arg("grid.json"), "--policy", "greedy"]);
    assert_eq!(code(&o), 2);
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("opt") && err.contains("rand"), "{err}");
}

#[test]
fn check_reports_true_on_a_trace_that_reached_the_target() {
    let w = Workspace::new();
    w.simulate("t.json", "opt", 30, 3);
    let idx = traces(&w.path("t.json"))
        .iter()
        .position(|t| states(t).last().unwrap() == "r3c3")
        .expect("some opt trace reaches the target");
    let o = cfcheck(&[
        "check", "--model", &w.arg("grid.json"), "--trace", &w.arg("t.json"), "--index", &idx.to_string(),
        "--formula", r#"P>=0.9 [ F[0,10] "target" ]"#,
    ]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "true");
    assert_eq!(v["n"], 1000);
}

#[test]
fn quantitative_counterfactual_prints_an_estimate() {
    let w = Workspace::new();
    w.simulate("t.json", "rand", 1, 5);
    let o = cfcheck(&[
        "check", "--model", &w.arg("grid.json"), "--trace", &w.arg("t.json"), "--n", "400", "--seed", "9",
        "--formula", r#"[pi<-opt]@-1.P=? [ !"unsafe" U[0,10] "target" ]"#,
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["verdict"], "estimate");
    let (mean, lo, hi) = (v["mean"].as_f64().unwrap(), v["ci"][0].as_f64().unwrap(), v["ci"][1].as_f64().unwrap());
    assert!((0.0..=1.0).contains(&mean) && lo <= mean && mean <= hi);
    assert_eq!(v["seed"], 9);
}

#[test]
fn check_output_is_deterministic_under_a_fixed_seed() {
    let w = Workspace::new();
    w.simulate("t.json", "rand", 1, 2);
    let run = |jobs: &str| {
        stdout(&cfcheck(&[
            "check", "--model", &w.arg("grid.json"), "--trace", &w.arg("t.json"), "--n", "300", "--seed", "4",
            "--jobs", jobs, "--formula", r#"[pi<-opt]@-2.P=? [ F[0,10] "target" ]"#,
        ]))
    };
    let first = run("1");
    assert!(!first.is_empty());
    assert_eq!(first, run("1"));
    assert_eq!(first, run("0"));
}

#[test]
fn malformed_formula_exits_with_parse_code() {
    let w = Workspace::new();
    w.simulate("t.json", "rand", 1, 0);
    let o = cfcheck(&[
        "check", "--model", &w.arg("grid.json"), "--trace", &w.arg("t.json"), "--formula", "P>= [ F[0,2] ",
    ]);
    assert_eq!(code(&o), 4);
    assert!(String::from_utf8_lossy(&o.stderr).contains("parse error"));
}

#[test]
fn inconsistent_trace_exits_with_code_five() {
    let w = Workspace::new();
    // a jump from the start cell straight to the target is impossible
    std::fs::write(
        w.path("bad.json"),
        r#"{ "policy": "opt", "steps": [ { "state": "r0c0", "action": "Down" }, { "state": "r3c3", "action": "Up" } ] }"#,
    )
    .unwrap();
    let check = cfcheck(&[
        "check", "--model", &w.arg("grid.json"), "--trace", &w.arg("bad.json"), "--formula", "true",
    ]);
    assert_eq!(code(&check), 5);
    let abduct = cfcheck(&["abduct", "--model", &w.arg("grid.json"), "--trace", &w.arg("bad.json")]);
    assert_eq!(code(&abduct), 5);
}

#[test]
fn abduct_writes_one_row_per_sample_step_and_state() {
    let w = Workspace::new();
    w.simulate("t.json", "rand", 1, 6);
    let o = cfcheck(&["abduct", "--model", &w.arg("grid.json"), "--trace", &w.arg("t.json"), "--n", "20"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("sample,step,state,gumbel_value"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    // 11 observed states give 10 transitions
    assert_eq!(rows.len(), 20 * 10 * 16);
    assert!(rows.iter().all(|r| r.len() == 4 && r[3].parse::<f64>().is_ok()));
    assert_eq!(rows.last().unwrap()[..2], ["19", "10"]);
}

#[test]
fn experiment_writes_csv_and_summary() {
    let w = Workspace::new();
    let o = cfcheck(&[
        "experiment", "cf_offset1", "--reps", "3", "--paths", "5", "--contexts", "4", "--seed", "1",
        "--summary", &w.arg("summary.json"),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("repetition,arm,phi_probability"));
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    let summary: Value = serde_json::from_str(&std::fs::read_to_string(w.path("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["arms"].as_array().unwrap().len(), 2);

    let bad = cfcheck(&["experiment", "offset3"]);
    assert_eq!(code(&bad), 2);
}
