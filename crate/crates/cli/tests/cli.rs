use std::path::PathBuf;
use std::process::{Command, Output};

fn tfag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tfag")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn temp_file(name: &str, body: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("tfag-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, body).unwrap();
    path
}

const COFINITE: &str = r#"{"cofinite_complement":[0]}"#;

#[test]
fn build_fuchs_counts_generators() {
    let o = tfag(&["build", "fuchs", "--stages", "6"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("stage 6: 15 generators"), "{out}");
    assert!(out.contains("2: link"));
}

#[test]
fn fuchs_certificate_passes() {
    let o = tfag(&["verify", "fuchs", "--indecomposable"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("x1 -- 1*x2 via 2"));
}

#[test]
fn fuchs_search_is_bounded_refutation() {
    let o = tfag(&["search", "fuchs", "--bound", "6", "--stage", "8"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("1128 candidates"), "{out}");
    assert!(out.contains("not a proof"));
}

#[test]
fn cofinite_split_verifies_and_is_found() {
    let o = tfag(&["verify", "cof", "--w", COFINITE, "--lemma53"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("A = <1/2*g1 + 3/2*g2>"));

    let o = tfag(&["search", "cof", "--w", COFINITE, "--bound", "4", "--stage", "12"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict: found"));
}

#[test]
fn cofinite_split_from_file() {
    let f = temp_file("w.json", COFINITE);
    let o = tfag(&["verify", "cof", "--file", f.to_str().unwrap(), "--lemma53"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn free_group_splits() {
    let o = tfag(&["search", "free2", "--bound", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("A = <1*x1>") && out.contains("B = <1*x2>"), "{out}");
}

#[test]
fn explicit_pair() {
    let ok = tfag(&["verify", "free2", "--pair", r#"{"a":["x1"],"b":["x2"]}"#]);
    assert_eq!(ok.status.code(), Some(0));
    let bad = tfag(&["verify", "fuchs", "--pair", r#"{"a":["x1"],"b":["x2"]}"#]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stdout(&bad).contains("FAIL at generator"));
}

#[test]
fn chain_path_splits() {
    let f = temp_file("chain.json", "[[],[0],[0,0],[0,0,0],[0,0,0,0]]");
    let o = tfag(&["verify", "tree", "--file", f.to_str().unwrap(), "--path", "[0,0,0,0]"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("verdict: pass"));
}

#[test]
fn malformed_tree_reports_line() {
    let f = temp_file("bad.json", "[\n [],\n [0],\n [0,x]\n]\n");
    let o = tfag(&["build", "tree", "--file", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("bad.json:4:"), "{err}");
}

#[test]
fn duplicate_tree_node_reports_line() {
    let f = temp_file("dup.json", "[\n [],\n [0],\n [0]\n]\n");
    let o = tfag(&["build", "tree", "--file", f.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dup.json:4:"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(tfag(&["build", "nonsense"]).status.code(), Some(2));
    assert_eq!(tfag(&["build", "cof"]).status.code(), Some(2));
    assert_eq!(tfag(&["verify", "fuchs"]).status.code(), Some(2));
    assert_eq!(tfag(&["verify", "fuchs", "--lemma53"]).status.code(), Some(2));
    assert_eq!(tfag(&["build", "fuchs", "--stages", "2", "--stage", "5"]).status.code(), Some(2));
    assert_eq!(tfag(&["search", "free5"]).status.code(), Some(2));
}

#[test]
fn json_is_deterministic() {
    let args = ["report", "fuchs", "--stage", "3", "--format", "json"];
    let a = stdout(&tfag(&args));
    let b = stdout(&tfag(&args));
    assert_eq!(a, b);
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["verdict"], "reported");
    assert_eq!(v["basis"], serde_json::json!(["x1", "x2"]));
    assert!(!a.contains("time"));
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("tfag-cli-{}-out.json", std::process::id()));
    let o = tfag(&["build", "base", "--format", "json", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["construction"]["kind"], "infinite_base");
}
