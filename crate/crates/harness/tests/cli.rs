use std::path::PathBuf;
use std::process::Command;

fn hvpopt() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hvpopt"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

#[test]
fn missing_config_exits_with_two() {
    let s = hvpopt().args(["solve", "--config", "/nonexistent.json"]).status().unwrap();
    assert_eq!(s.code(), Some(2));
}

#[test]
fn wrong_subcommand_for_config_exits_with_two() {
    let s = hvpopt().arg("sweep").arg("--config").arg(config("lowerbound_progress.json")).status().unwrap();
    assert_eq!(s.code(), Some(2));
}

#[test]
fn unknown_suite_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let s = hvpopt().args(["verify", "--suite", "nope", "--out"]).arg(dir.path()).status().unwrap();
    assert_eq!(s.code(), Some(2));
}

#[test]
fn bad_worker_count_exits_with_two() {
    let s = hvpopt()
        .env("HVPOPT_WORKERS", "zero")
        .arg("lowerbound")
        .arg("--config")
        .arg(config("lowerbound_progress.json"))
        .status()
        .unwrap();
    assert_eq!(s.code(), Some(2));
}

#[test]
fn verify_core_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = hvpopt().args(["verify", "--suite", "core", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("verify.json")).unwrap()).unwrap();
    assert!(report["checks"].as_array().is_some_and(|c| !c.is_empty()));
}
