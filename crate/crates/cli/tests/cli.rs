//! End-to-end checks of the binary: subcommand behavior, exit codes, and
//! output determinism.

use std::process::{Command, Output};

use tempfile::tempdir;

fn kisinlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kisinlab"))
        .args(args)
        .env_remove("KISINLAB_BUDGET")
        .output()
        .expect("binary runs")
}

#[test]
fn enumerate_emits_model_set() {
    let out = kisinlab(&["enumerate", "--p", "3", "--r", "2", "--e", "4"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["params"]["modulus"], "g^2+1");
    assert_eq!(json["window"], 4);
    let models = json["models"].as_array().unwrap();
    assert_eq!(models.len(), 11);
    let non_ordinary: Vec<_> = models
        .iter()
        .filter(|m| m["ordinary"] == serde_json::Value::Bool(false))
        .collect();
    assert_eq!(non_ordinary.len(), 1);
    assert_eq!(non_ordinary[0]["a"], serde_json::json!([1, 1]));
}

#[test]
fn enumerate_rejects_bad_ramification() {
    let out = kisinlab(&["enumerate", "--p", "3", "--r", "2", "--e", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("must divide"), "stderr: {msg}");
}

#[test]
fn enumerate_is_deterministic() {
    let first = kisinlab(&["enumerate", "--p", "3", "--r", "2", "--e", "4"]);
    let second = kisinlab(&["enumerate", "--p", "3", "--r", "2", "--e", "4"]);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
}

#[test]
fn budget_env_is_honored() {
    let out = Command::new(env!("CARGO_BIN_EXE_kisinlab"))
        .args(["enumerate", "--p", "3", "--r", "2", "--e", "4"])
        .env("KISINLAB_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
    // The explicit flag overrides the environment.
    let out = Command::new(env!("CARGO_BIN_EXE_kisinlab"))
        .args([
            "enumerate", "--p", "3", "--r", "2", "--e", "4", "--budget", "1000000",
        ])
        .env("KISINLAB_BUDGET", "5")
        .output()
        .unwrap();
    assert!(out.status.success());
}

#[test]
fn components_verifies_and_writes_dot() {
    let dir = tempdir().unwrap();
    let dot_path = dir.path().join("g.dot");
    let out = kisinlab(&[
        "components",
        "--p",
        "3",
        "--r",
        "2",
        "--e",
        "4",
        "--dot",
        dot_path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["verified"], serde_json::Value::Bool(true));
    let dot = std::fs::read_to_string(&dot_path).unwrap();
    assert!(dot.starts_with("graph components {"));
}

#[test]
fn verify_lemmas_small_grid() {
    let out = kisinlab(&["verify-lemmas", "--r-max", "2", "--m-max", "1"]);
    assert!(out.status.success());
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["passed"], serde_json::Value::Bool(true));
    assert_eq!(json["reports"].as_array().unwrap().len(), 4);
}

#[test]
fn path_check_both_answers() {
    let dir = tempdir().unwrap();
    let base = serde_json::json!({
        "params": {"p": 3, "r": 2, "e": 4, "modulus": "g^2+1", "work_prec": 56},
        "presentation": [
            [["u^4", "0"], ["0", "1"]],
            [["u^4", "0"], ["0", "1"]]
        ],
        "nilpotents": [
            [["0", "u^-1"], ["0", "0"]],
            [["0", "0"], ["u^-1", "0"]]
        ]
    });
    let failing = dir.path().join("failing.json");
    std::fs::write(&failing, serde_json::to_string(&base).unwrap()).unwrap();
    let out = kisinlab(&["path-check", "--input", failing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["satisfied"], serde_json::Value::Bool(false));

    let mut passing = base.clone();
    passing["nilpotents"] = serde_json::json!([
        [["0", "u^-1"], ["0", "0"]],
        [["0", "0"], ["0", "0"]]
    ]);
    let path = dir.path().join("passing.json");
    std::fs::write(&path, serde_json::to_string(&passing).unwrap()).unwrap();
    let out = kisinlab(&["path-check", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(json["satisfied"], serde_json::Value::Bool(true));
}

#[test]
fn usage_error_exits_two() {
    let out = kisinlab(&["enumerate", "--p", "3"]);
    assert_eq!(out.status.code(), Some(2));
}
