use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_preauction"))
}

const CONFIG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/example.ini");

#[test]
fn example_exits_zero_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["example", "--draws", "100000", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("PASS r_star")));
    assert!(!stdout.contains("FAIL"));
    assert!(dir.path().join("report.json").exists());
}

#[test]
fn failed_verification_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = bin().args(["verify", "--config", CONFIG, "--tau", "0.9", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("FAIL"));

    let out = bin().args(["verify", "--config", CONFIG, "--tau", "0.6", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn bad_input_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(&cfg, "[distribution]\nfamily = uniform\nlo = 0.5\nhi = 2\n[seller]\noutside_option = 2.5\n").unwrap();
    let out = bin().args(["analyze", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 6"));

    let out = bin().args(["analyze", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["simulate", "--config", CONFIG, "--tau", "3", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}
