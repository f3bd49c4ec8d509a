use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn qcmin(args: &[&str], stdin: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_qcmin"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(stdin.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn disk_feasibility() {
    let p = r#"{"dimension": 2, "constraints": [{"poly": "x1^2 + x2^2 - 9", "rel": "<0"}], "mode": "feasibility"}"#;
    let out = qcmin(&["solve", "--radius", "4"], p);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["status"], "feasible");
    let x: Vec<i64> = v["point"].as_array().unwrap().iter().map(|s| s.as_str().unwrap().parse().unwrap()).collect();
    assert!(x[0] * x[0] + x[1] * x[1] < 9);
}

#[test]
fn no_constraints_gives_origin() {
    let p = r#"{"dimension": 3, "mode": "feasibility", "bound": {"radius": 1}}"#;
    let out = qcmin(&["solve"], p);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["point"], serde_json::json!(["0", "0", "0"]));
}

#[test]
fn exit_codes_follow_status() {
    let infeasible = r#"{"dimension": 2, "constraints": [{"poly": "x1^2 + 1", "rel": "<=0"}], "mode": "feasibility", "bound": {"radius": 3}}"#;
    let out = qcmin(&["solve"], infeasible);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["status"], "infeasible");

    // unbounded below: radius doubling never settles
    let out = qcmin(&["solve"], r#"{"dimension": 1, "objective": "x1", "mode": "minimize"}"#);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["status"], "bound_exhausted");

    let out = qcmin(&["solve", "--mode", "minimize"], r#"{"dimension": 1, "objective": "3*x1^2 - 3*x1^4 + x1^6", "mode": "feasibility"}"#);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["status"], "optimal");
    assert_eq!(json(&out)["objective"], "0");
}

#[test]
fn malformed_input_is_diagnosed() {
    let out = qcmin(&["solve"], "{\"dimension\": 2,\n \"mode\": \"minimize\", \"extra\": 1}");
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("extra") && err.contains("line 2"), "{err}");

    let out = qcmin(&["solve"], r#"{"dimension": 2, "constraints": [{"poly": "x3", "rel": "<0"}], "mode": "feasibility"}"#);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("constraints[0]"));

    assert_eq!(qcmin(&["solve", "--no-such-flag"], "").status.code(), Some(3));
}

#[test]
fn gen_is_deterministic_and_verifies() {
    let a = qcmin(&["gen", "--seed", "1", "--n", "2", "--d", "2", "--s", "2", "--radius", "5"], "");
    let b = qcmin(&["gen", "--seed", "1", "--n", "2", "--d", "2", "--s", "2", "--radius", "5"], "");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);

    for seed in ["3", "4"] {
        let inst = qcmin(&["gen", "--seed", seed, "--n", "2", "--d", "4", "--s", "2", "--radius", "4"], "");
        let out = qcmin(&["solve", "--verify"], &String::from_utf8(inst.stdout).unwrap());
        assert_eq!(json(&out)["verified"], true, "seed {seed}");
    }
}

#[test]
fn verify_refuses_large_boxes() {
    let p = r#"{"dimension": 2, "mode": "feasibility", "bound": {"radius": 13}}"#;
    let out = qcmin(&["solve", "--verify"], p);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn trace_and_parallel() {
    let inst = qcmin(&["gen", "--seed", "7", "--n", "3", "--d", "2", "--s", "1", "--radius", "3"], "");
    let text = String::from_utf8(inst.stdout).unwrap();
    let dir = std::env::temp_dir().join(format!("qcmin-trace-{}", std::process::id()));
    let path = dir.with_extension("jsonl");
    let seq = qcmin(&["solve", "--trace", path.to_str().unwrap()], &text);
    let lines = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).ok();
    assert!(lines.lines().count() > 0);
    for l in lines.lines() {
        let ev: Value = serde_json::from_str(l).unwrap();
        assert!(ev["kind"] == "node" || ev["kind"] == "step");
    }

    let par = qcmin(&["solve", "--parallel"], &text);
    let (mut s, mut p) = (json(&seq), json(&par));
    s["stats"]["wall_ms"] = Value::Null;
    p["stats"]["wall_ms"] = Value::Null;
    assert_eq!(s["status"], p["status"]);
    assert_eq!(s["objective"], p["objective"]);
    assert_eq!(s["point"], p["point"]);
}

#[test]
fn cross_polytope_points_agree() {
    let inst = qcmin(&["gen", "--seed", "11", "--n", "2", "--d", "3", "--s", "2", "--radius", "5"], "");
    let text = String::from_utf8(inst.stdout).unwrap();
    let net = json(&qcmin(&["solve"], &text));
    let cross = json(&qcmin(&["solve", "--test-points", "cross", "--sigma", "2"], &text));
    assert_eq!(net["status"], cross["status"]);
    assert_eq!(net["objective"], cross["objective"]);
}
