use std::process::{Command, Output};

use serde_json::Value;

const HOPF: &str = r#"{"strands": 2, "word": [1, 1]}"#;
const BORROMEAN: &str = r#"{"strands": 3, "word": [1, -2, 1, -2, 1, -2]}"#;

fn mubar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mubar")).args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn verify_hopf_exits_zero() {
    let out = mubar(&["verify", "--json", HOPF]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], "mubar.verify/1");
    assert_eq!(v["pass"], true);
}

#[test]
fn verify_mismatch_exits_one() {
    let out = mubar(&["verify", "--json", r#"{"strands": 3, "word": [1, 1, 2, 2]}"#]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn parse_errors_exit_two() {
    assert_eq!(mubar(&["mu", "--json", "{not json"]).status.code(), Some(2));
    assert_eq!(mubar(&["mu", "--json", r#"{"strands": 2, "word": [7]}"#]).status.code(), Some(2));
    assert_eq!(mubar(&["mu"]).status.code(), Some(2));
    assert_eq!(mubar(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(mubar(&["mu", "-i", "/nonexistent/input.json"]).status.code(), Some(2));
}

#[test]
fn precondition_errors_exit_three() {
    let out = mubar(&["gamma", "--json", r#"{"strands": 2, "word": [1]}"#]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    let out = mubar(&["--max-crossings", "2", "conway", "--json", BORROMEAN]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn file_input_matches_inline() {
    let dir = std::env::temp_dir().join(format!("mubar-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("borromean.json");
    std::fs::write(&path, BORROMEAN).unwrap();
    let a = mubar(&["mu", "-q", "5", "-i", path.to_str().unwrap()]);
    let b = mubar(&["mu", "-q", "5", "--json", BORROMEAN]);
    std::fs::remove_dir_all(&dir).unwrap();
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["entries"]["1,2,3"], "1");
}

#[test]
fn text_format_is_plain() {
    let out = mubar(&["--format", "text", "gamma", "-q", "5", "--json", HOPF]);
    assert_eq!(out.status.code(), Some(0));
    let s = String::from_utf8(out.stdout).unwrap();
    assert!(!s.trim_start().starts_with('{'));
}

#[test]
fn seifert_input_for_conway() {
    let v = json(&mubar(&["conway", "--json", r#"{"seifert": [[-1, 1], [0, -1]]}"#]));
    assert_eq!(v["schema"], "mubar.conway/1");
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        vec!["gamma", "-q", "8", "--json", BORROMEAN],
        vec!["phi", "-q", "6", "--json", BORROMEAN],
        vec!["corpus", "--max-letters", "4", "-q", "6"],
        vec!["corpus", "--sample", "10", "--seed", "11", "-q", "6"],
    ] {
        let a = mubar(&args);
        let b = mubar(&args);
        assert!(!a.stdout.is_empty());
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
