use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn coupling(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_coupling"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn build_constant_spec_stops_at_once() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let out = coupling(&["build", "--spec", path(&fixture("constant_spec.json")), "--out", path(&plan)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = json(&plan);
    assert_eq!(doc["law_of_n"], serde_json::json!({"1": "1/1"}));
    assert_eq!(doc["schedule"]["windows"], serde_json::json!([2, 2, 2]));
}

#[test]
fn built_plan_round_trips_through_verify() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let spec = fixture("two_point_spec.json");
    assert!(coupling(&["build", "--spec", path(&spec), "--out", path(&plan)]).status.success());
    let from_plan = dir.path().join("a.json");
    let from_spec = dir.path().join("b.json");
    let a = coupling(&["verify", "--plan", path(&plan), "--samples", "500", "--out", path(&from_plan)]);
    let b = coupling(&["verify", "--spec", path(&spec), "--samples", "500", "--out", path(&from_spec)]);
    assert!(a.status.success() && b.status.success());
    assert_eq!(std::fs::read(&from_plan).unwrap(), std::fs::read(&from_spec).unwrap());
}

#[test]
fn corrupted_plan_fails_verification() {
    let out = coupling(&["verify", "--plan", path(&fixture("corrupted_plan.json")), "--samples", "10"]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("ladder.mu_monotone (n=2 at (b): 1/2 > 1/4)"), "{stderr}");
}

#[test]
fn skorohod_line_has_no_distance_violations() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("run");
    let out = coupling(&[
        "skorohod",
        "--model",
        path(&fixture("line3_model.json")),
        "--laws",
        path(&fixture("line3_laws.json")),
        "--depth",
        "2",
        "--samples",
        "10000",
        "--out",
        path(&out_dir),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    let report = json(&out_dir.join("report.json"));
    let distance = report["mc_checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == "skorohod.distance")
        .unwrap();
    assert_eq!(distance["samples"], 10000);
    assert_eq!(distance["failures"], 0);
    let tree = json(&out_dir.join("tree.json"));
    assert_eq!(tree["certificate"], "ambient");
    assert!(out_dir.join("plan.json").is_file());
}

#[test]
fn table_backend_gives_vacuous_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let out = coupling(&[
        "skorohod",
        "--model",
        path(&fixture("line3_model.json")),
        "--laws",
        path(&fixture("line3_laws.json")),
        "--backend",
        "table",
        "--samples",
        "100",
        "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success());
    assert_eq!(json(&dir.path().join("tree.json"))["certificate"], "vacuous");
}

#[test]
fn samples_are_reproducible() {
    let spec = fixture("two_point_spec.json");
    let args = ["sample", "--spec", path(&spec), "--samples", "50", "--seed", "9"];
    let first = coupling(&args);
    assert!(first.status.success());
    assert_eq!(first.stdout, coupling(&args).stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    assert_eq!(text.lines().count(), 50);
    let record: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(record["seed"], 9);
    assert_eq!(record["Z_hat_n"].as_array().unwrap().len(), 2);
    let other = coupling(&["sample", "--spec", path(&spec), "--samples", "50", "--seed", "10"]);
    assert_ne!(text.as_bytes(), other.stdout.as_slice());
}

#[test]
fn report_renders_text() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.json");
    let spec = fixture("two_point_spec.json");
    assert!(coupling(&["verify", "--spec", path(&spec), "--samples", "100", "--out", path(&report)]).status.success());
    let out = coupling(&["report", "--report", path(&report)]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("[pass] ladder.mu_monotone"));
    assert!(text.trim_end().ends_with("result: PASS"));
}

#[test]
fn bad_inputs_are_named() {
    let missing = coupling(&["build", "--spec", "/nonexistent/spec.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("no such file"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"space\": [[\"a\"]],\n  \"members\": [\n").unwrap();
    let parsed = coupling(&["build", "--spec", path(&bad)]);
    assert_eq!(parsed.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&parsed.stderr).contains("line 4"));

    let invalid = dir.path().join("invalid.json");
    std::fs::write(
        &invalid,
        r#"{"space": [["a", "b"]], "members": [{"a": "3/4"}], "limit": {"a": "1/2", "b": "1/2"}, "tail": {"eventually_equal": 1}}"#,
    )
    .unwrap();
    let rejected = coupling(&["build", "--spec", path(&invalid)]);
    assert_eq!(rejected.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&rejected.stderr).contains("member 1"));
}
