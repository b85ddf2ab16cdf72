use std::process::Command;

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_spiraling"))
}

#[test]
fn census_run_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["run", "biased-census", "--nmax", "5", "--out"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["experiment"], "biased-census");
    assert_eq!(report["records"][5]["L_n"], 216);
    let csv = std::fs::read_to_string(dir.path().join("biased-census.csv")).unwrap();
    assert!(csv.lines().count() > 200);
}

#[test]
fn identical_runs_match_apart_from_timestamp() {
    let run = || {
        let out = bin()
            .args(["run", "thm1", "--T", "2000", "--n", "10", "--A", "sign:-1", "--seed", "7"])
            .output()
            .unwrap();
        assert!(out.status.success());
        let mut v: Value = serde_json::from_slice(&out.stdout).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        serde_json::to_string(&v).unwrap()
    };
    let a = run();
    assert_eq!(a, run());
    assert!(a.contains("mean_ratio"));
}

#[test]
fn config_file_and_flags_combine() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"d": 2, "t_grid": [1.0], "M": 20, "eps": 0.1, "A": "hemisphere:1,0"}"#).unwrap();
    let out = bin()
        .args(["run", "thm3", "--config"])
        .arg(&cfg)
        .args(["--seed", "3", "--threads", "1"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["parameters"]["M"], 20);
    assert_eq!(report["seed"], 3);
}

#[test]
fn exit_codes_distinguish_failures() {
    let out = bin().args(["run", "nope"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "config");

    let out = bin().args(["run", "thm3", "--d", "2", "--eps", "0"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));

    let out = bin()
        .args(["run", "thm3", "--d", "2", "--t", "6", "--M", "4"])
        .env("SPIRALING_CANDIDATE_BUDGET", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"], "budget-exceeded");
}
