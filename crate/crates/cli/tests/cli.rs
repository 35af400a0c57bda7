//! End-to-end runs of the `umbilic` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const PRENORMAL: &str = r#"{"degree": 5, "terms": [[1, 1, 1.0], [3, 1, 0.16666666666666666], [1, 3, 0.16666666666666666], [4, 0, 0.08333333333333333], [0, 4, 0.08333333333333333]]}"#;
const DISC: &str = r#"{"degree": 5, "terms": [[1, 1, 1.0], [4, 0, 1.0], [2, 2, 2.0], [0, 4, 1.0]]}"#;
const FLEC_FAMILY: &str = r#"{"degree": 5, "terms": [[1, 1, [1.0]], [3, 1, [0.16666666666666666]], [1, 3, [0.16666666666666666]], [4, 0, [0.0, 0.041666666666666664]], [0, 4, [0.041666666666666664]]]}"#;

fn umbilic(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_umbilic")).args(args).output().expect("binary runs")
}

fn file(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn prenormal_node_example() {
    let dir = TempDir::new().unwrap();
    let h = file(&dir, "H.json", PRENORMAL);
    let out = umbilic(&["nodes", "--surface", s(&h), "--window", "-0.3,0.3,-0.3,0.3", "--grid", "256"]);
    let v = stdout_json(&out);
    let nodes = v["nodes"].as_array().unwrap();
    assert_eq!(nodes.len(), 1);
    assert_eq!(nodes[0]["kind"], "hyperbonode");
    assert_eq!(nodes[0]["index"], 1);
    assert!((nodes[0]["rho"].as_f64().unwrap() - 0.75).abs() < 1e-12);
    assert!(String::from_utf8_lossy(&out.stdout).contains("7.5000000000000000e-1"));
}

#[test]
fn invariant_refines_from_a_nearby_point() {
    let dir = TempDir::new().unwrap();
    let h = file(&dir, "H.json", PRENORMAL);
    let v = stdout_json(&umbilic(&["invariant", "--surface", s(&h), "--point", "0.001,-0.002"]));
    assert_eq!(v["index"], 1);
    assert!(v["x"].as_f64().unwrap().abs() < 1e-10);
}

#[test]
fn disc_trace_figure() {
    let dir = TempDir::new().unwrap();
    let disc = file(&dir, "disc.json", DISC);
    let svg = dir.path().join("out.svg");
    let json = dir.path().join("trace.json");
    let out = umbilic(&["trace", "--surface", s(&disc), "--window", "-2,2,-2,2", "--grid", "128", "--svg", s(&svg), "--output", s(&json)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&svg).unwrap();
    let parabolic: Vec<&str> = text.lines().filter(|l| l.starts_with(r#"<path id="parabolic"#)).collect();
    assert_eq!(parabolic.len(), 1);
    assert!(parabolic[0].contains(" Z\""));
    assert!(text.contains(r#"class="right" stroke="black""#));
    assert!(text.contains(r#"class="left" stroke="white""#));

    let v: Value = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    let kinds: Vec<&str> = v["curves"].as_array().unwrap().iter().map(|c| c["kind"].as_str().unwrap()).collect();
    assert_eq!(kinds.len(), 3);
    assert_eq!(v["curves"][0]["segments"].as_array().unwrap().len(), 1);
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let disc = file(&dir, "disc.json", DISC);
    let mut svgs = Vec::new();
    let mut stdouts = Vec::new();
    for k in 0..2 {
        let svg = dir.path().join(format!("plot{k}.svg"));
        let out = umbilic(&["plot", "--surface", s(&disc), "--window", "-2,2,-2,2", "--grid", "128", "--svg", s(&svg)]);
        assert!(out.status.success());
        svgs.push(fs::read(&svg).unwrap());
        stdouts.push(umbilic(&["trace", "--surface", s(&disc), "--window", "-2,2,-2,2", "--grid", "64"]).stdout);
    }
    assert_eq!(svgs[0], svgs[1]);
    assert_eq!(stdouts[0], stdouts[1]);
    assert!(String::from_utf8_lossy(&svgs[0]).contains(r#"class="hyperbonode""#));
}

#[test]
fn sweep_writes_csv_and_transitions() {
    let dir = TempDir::new().unwrap();
    let fam = file(&dir, "flec.json", FLEC_FAMILY);
    let csv = dir.path().join("sweep.csv");
    let out = umbilic(&[
        "sweep", "--family", s(&fam), "--window", "-0.4,0.4,-0.4,0.4", "--grid", "64", "--t-range", "-0.5,0.5", "--steps", "6", "--csv", s(&csv),
    ]);
    let v = stdout_json(&out);
    let transitions = v["transitions"].as_array().unwrap();
    assert!(transitions.iter().any(|t| t["kind"] == "flec-hyperbonode"), "{transitions:?}");
    let table = fs::read_to_string(&csv).unwrap();
    assert!(!table.contains('\r'));
    let mut lines = table.lines();
    assert_eq!(lines.next().unwrap(), "t,component_id,n_hyperbonodes,index_sum,n_ellipnodes,sign_sum,flags");
    assert!(lines.count() >= 6);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let h = file(&dir, "H.json", PRENORMAL);
    let bad = file(&dir, "bad.json", r#"{"degree": 5, "terms": [[1, 1]]}"#);
    let code = |args: &[&str]| umbilic(args).status.code();
    assert_eq!(code(&["nodes", "--surface", s(&bad)]), Some(1));
    assert_eq!(code(&["nodes", "--surface", s(&h), "--grid", "8"]), Some(1));
    assert_eq!(code(&["nodes", "--surface", s(&h), "--window", "1,0,0,1"]), Some(1));
    assert_eq!(code(&["nodes", "--surface", s(&h), "--tol-scale", "-1"]), Some(1));
    assert_eq!(code(&["frobnicate"]), Some(1));
    assert_eq!(code(&["invariant", "--surface", s(&h), "--point", "5,5"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn verify_builtin_suite() {
    let out = umbilic(&["verify", "--suite", "builtin"]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().filter(|l| l.starts_with("[PASS]")).count(), 11, "{text}");
    assert_eq!(out.status.code(), Some(0));
}
