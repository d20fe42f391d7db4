use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

/// Exit code and stdout.
fn af2(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_af2")).args(args).output().expect("binary runs");
    (out.status.code().expect("exit code"), String::from_utf8(out.stdout).expect("utf-8"))
}

fn af2_json(args: &[&str]) -> (i32, Value) {
    let mut all = vec!["--format", "json"];
    all.extend_from_slice(args);
    let (code, out) = af2(&all);
    let v: Value = serde_json::from_str(&out).expect("JSON output");
    assert_eq!(v["exit"], code);
    (code, v["result"].clone())
}

#[test]
fn normalize_and_equiv() {
    let (code, out) = af2(&["normalize", "--term", "(\\x. x) y"]);
    assert_eq!((code, out.lines().next()), (0, Some("y")));
    assert_eq!(af2(&["normalize", "--term", "(\\d. d d) (\\d. d d)"]).0, 2);
    assert_eq!(af2(&["normalize", "--term", "\\x. f x", "--calculus", "beta-eta"]).1.lines().next(), Some("f"));
    assert_eq!(af2(&["equiv", "--left", "\\x. f x", "--right", "f"]).0, 0);
    assert_eq!(af2(&["equiv", "--left", "\\x y. x", "--right", "\\x y. y"]).0, 1);
}

#[test]
fn input_errors_exit_with_three() {
    assert_eq!(af2(&["normalize", "--term", "\\x."]).0, 3);
    assert_eq!(af2(&["frobnicate"]).0, 3);
    assert_eq!(af2(&["--bounds", "maxSteps=0", "normalize", "--term", "x"]).0, 3);
    assert_eq!(af2(&["--bounds", "colour=3", "normalize", "--term", "x"]).0, 3);
    assert_eq!(af2(&["sandbox", "--config", &data("bad.sandbox")]).0, 3);
    assert_eq!(af2(&["check", "--derivation", &data("missing.json")]).0, 3);
    assert_eq!(af2(&["typecheck", "--term", "(\\x. x) y", "--type", "forall X/0. X"]).0, 3);
    let (code, v) = af2_json(&["normalize", "--term", "\\x."]);
    assert_eq!(code, 3);
    assert!(v["error"].as_str().unwrap().contains("col"), "{v}");
}

#[test]
fn typecheck_verdicts() {
    let (code, v) = af2_json(&["typecheck", "--term", "\\x. x", "--type", "forall X/0. X -> X"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "typable");
    assert_eq!(v["derivation"]["rule"], "R6");
    let a = "forall X/1. (X(0) -> forall y. X(y)) -> X(0) -> X(0)";
    let (code, v) = af2_json(&["typecheck", "--term", "\\x. x", "--type", a]);
    assert_eq!(code, 1);
    assert_eq!(v["exhaustive"], true);
    let ctx = "y : forall X/0. X";
    assert_eq!(af2(&["typecheck", "--term", "y", "--type", "forall X/0. X -> X", "--context", ctx]).0, 0);
}

#[test]
fn derivation_files() {
    assert_eq!(af2(&["check", "--derivation", &data("succ.json")]).0, 0);
    assert_eq!(af2(&["check", "--derivation", &format!("@{}", data("zero.json"))]).0, 0);
    let (code, v) = af2_json(&["check", "--derivation", &data("succ.json"), "--mode", "af2zero"]);
    assert_eq!(code, 1);
    assert_eq!(v["rule"], "R7");
}

#[test]
fn type_classes() {
    let (code, v) = af2_json(&["classify", "--type", "forall X/1. X(0) -> (forall y. X(y) -> X(s(y))) -> X(x)"]);
    assert_eq!(code, 0);
    assert_eq!((v["bplus"].as_str(), v["proper"].as_bool()), (Some("yes"), Some(true)));
    let e = "forall X/1. (forall x. X(x) -> X(0)) -> (forall x. X(x)) -> X(0)";
    let (code, v) = af2_json(&["star", "--type", e]);
    assert_eq!(code, 1);
    assert_eq!(v["b"], "forall x. X_0(x)");
    assert_eq!(v["n"], 1);
    let n = "forall X/1. X(0) -> (forall y. X(y) -> X(s(y))) -> X(x)";
    assert_eq!(af2(&["--bounds", "maxInstDepth=0", "classify", "--type", n]).0, 2);
    let (code, v) = af2_json(&["subtypes", "--type", "forall X/1. (forall y. X(y)) -> X(0)", "--sign", "neg"]);
    assert_eq!(code, 0);
    assert_eq!(v.as_array().unwrap().len(), 2);
}

#[test]
fn data_type_commands() {
    assert_eq!(af2(&["--theory", "pred", "adequate"]).0, 0);
    assert_eq!(af2(&["--theory", &data("pred.theory"), "adequate"]).0, 0);
    let pred = "\\n x f. n (\\u. x) (\\g h. h (g f)) (\\u. u)";
    assert_eq!(af2(&["represents", "--program", pred, "--table", &data("pred.table")]).0, 0);
    assert_eq!(af2(&["represents", "--program", "\\n. n", "--builtin", "succ", "--up-to", "3"]).0, 1);
    let (code, v) = af2_json(&["progthm", "--derivation", &data("succ.json"), "--builtin", "succ", "--up-to", "10"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "checked");
    assert_eq!(v["rows"].as_array().unwrap().len(), 11);
    let (code, v) = af2_json(&["progthm", "--derivation", &data("zero.json"), "--builtin", "succ"]);
    assert_eq!(code, 1);
    assert_eq!(v["verdict"], "preconditions-fail");
}

#[test]
fn sandbox_commands() {
    let cfg = data("identity.sandbox");
    let a = "forall X/1. (X(0) -> forall y. X(y)) -> X(0) -> X(0)";
    let (code, v) = af2_json(&["sandbox", "--config", &cfg, "--term", "\\x. x", "--type", a]);
    assert_eq!((code, v["verdict"].as_str()), (0, Some("yes")));
    assert_eq!(v["family_closed"], true);
    assert_eq!(af2(&["sandbox", "--config", &cfg, "--term", "\\x. x", "--type", "forall X/0. X"]).0, 1);
    assert_eq!(af2(&["sandbox", "--config", &cfg, "--term", "\\x. x"]).0, 3);
    let (code, v) = af2_json(&["sandbox", "--config", &data("numerals.sandbox"), "--derivation", &data("zero.json")]);
    assert!(code == 0 || code == 2, "{v}");
    assert_ne!(v["verdict"], "fail");
}

#[test]
fn suite_command() {
    let (code, out) = af2(&["suite"]);
    assert_eq!(code, 0, "{out}");
    assert!(out.lines().last().unwrap().ends_with("0 fail, 0 weaker"));
    let (code, v) = af2_json(&["--bounds", "maxInstDepth=0", "suite"]);
    assert_eq!(code, 2);
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.iter().all(|c| c["outcome"] != "fail"));
    assert!(checks.iter().any(|c| c["outcome"] == "weaker"));
}
