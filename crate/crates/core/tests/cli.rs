use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_prime-orbits"))
}

#[test]
fn list_shows_registry() {
    let out = bin().arg("list").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 15);
    assert!(text.contains("section_claims"));
}

#[test]
fn run_writes_json_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let (json, csv) = (dir.path().join("r.json"), dir.path().join("r.csv"));
    let out = bin()
        .args(["run", "phase_contrast", "--seed", "4", "--threads", "1", "--out-json"])
        .arg(&json)
        .arg("--out-csv")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(v["experiment"], "phase_contrast");
    assert_eq!(v["params"]["seed"], "4");
    assert!(v["metrics"].as_array().unwrap().iter().all(|m| m.get("N").is_some() && m.get("z").is_some()));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("schema,experiment,name,N,z,value"));
}

#[test]
fn config_errors_report_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    std::fs::write(&path, "experiment = bt_ratio\n[grid]\nwidth = 3\n").unwrap();
    let out = bin().args(["run", "bt_ratio", "--config"]).arg(&path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("line 3") && err.contains("width"), "{err}");
}

#[test]
fn unknown_experiment_fails() {
    let out = bin().args(["run", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("pnt_kochergin"));
}

#[test]
fn sieve_cache_and_alpha() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("p.sieve");
    let out = bin().args(["sieve", "--limit", "100000", "--cache"]).arg(&cache).output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("pi = 9592"));
    assert!(cache.exists());
    let out = bin().args(["build-alpha", "--preset", "kochergin"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["quotients"].as_array().unwrap().len() >= 3);
    assert!(v.get("flags").is_some());
    let out = bin().args(["build-alpha", "--preset", "reparam", "--flow"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["coefficients"][0].as_array().unwrap().len() == 4);
}
