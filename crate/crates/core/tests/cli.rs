use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn hashmac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hashmac"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

#[test]
fn region_prints_verdicts_and_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("region.csv");
    let cfg = configs().join("adder_region.json");
    let o = hashmac(&["region", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("(0.5, 0.5) inside"));
    assert!(stdout.contains("(1, 1) outside: J={1,2}"));
    let csv = std::fs::read_to_string(out).unwrap();
    assert!(csv.starts_with("point,verdict,lhs,bound,split_rates,split\n"));
    assert_eq!(csv.lines().count(), 4);
}

#[test]
fn verify_passes_and_fault_fails() {
    let dir = tempfile::tempdir().unwrap();
    let ok = write(&dir, "ok.json", r#"{"verify": {"suite": "types", "ns": [4, 6]}}"#);
    let o = hashmac(&["verify", "--config", &ok]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8(o.stdout).unwrap().contains("PASS lemma6-type-class"));

    let bad = write(
        &dir,
        "fault.json",
        r#"{"verify": {"suite": "types", "ns": [4, 6], "fault": "lambda-sign"}}"#,
    );
    let o = hashmac(&["verify", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stdout).unwrap().contains("FAIL"));
}

#[test]
fn config_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let broken = write(&dir, "broken.json", "{ not json");
    assert_eq!(hashmac(&["region", "--config", &broken]).status.code(), Some(2));

    let missing = dir.path().join("absent.json");
    assert_eq!(hashmac(&["region", "--config", missing.to_str().unwrap()]).status.code(), Some(2));

    // a verify-only config has no region block
    let only_verify = write(&dir, "v.json", r#"{"verify": {}}"#);
    let o = hashmac(&["region", "--config", &only_verify]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8(o.stderr).unwrap().contains("region"));
}

#[test]
fn infeasible_rates_exit_one_unless_forced() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir,
        "sim.json",
        r#"{"simulate": {
            "model": {"scenario": "private", "channel": {"preset": "binary-adder"},
                      "inputs": [[0.5, 0.5], [0.5, 0.5]]},
            "rates": [0.9, 0.9], "eps": [0.05, 0.05], "n": [4],
            "ensemble": {"kind": "uniform-all-linear"},
            "candidates": 1, "pilot_trials": 0, "trials": 5}}"#,
    );
    assert_eq!(hashmac(&["simulate", "--config", &cfg]).status.code(), Some(1));
    let o = hashmac(&["simulate", "--config", &cfg, "--force", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = String::from_utf8(o.stdout).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("private,4,0.9;0.9,uniform-all-linear,3,0,5,"), "{row}");
}

#[test]
fn ensemble_stats_reports_two_universal() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        &dir,
        "stats.json",
        r#"{"ensemble_stats": {"ensembles": [{"kind": "uniform-all-linear"}], "n": [4]}}"#,
    );
    let o = hashmac(&["ensemble-stats", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(0));
    let csv = String::from_utf8(o.stdout).unwrap();
    assert_eq!(csv.lines().nth(1), Some("4,uniform-all-linear,2,,1,0,exact,0"));
}
