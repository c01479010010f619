use std::path::PathBuf;
use std::process::{Command, Output};

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name).display().to_string()
}

fn symstat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_symstat")).args(args).output().expect("binary runs")
}

#[test]
fn passing_checks_exit_zero() {
    let out = symstat(&["build", &scenario("qubit-tetra.scn")]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn failing_checks_exit_one() {
    let out = symstat(&["validate", &scenario("triangle.scn")]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("[FAIL] A w1"));
    assert!(text.contains("[PASS] B:"));
    assert!(text.contains("[PASS] C:"));
}

#[test]
fn module_errors_exit_one() {
    let out = symstat(&["born", &scenario("qubit-tetra.scn"), "A", "nope"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("unknown experiment 'nope'"));
    let out = symstat(&["build", &scenario("spin-octa.scn"), "--rep", "derived"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn parse_errors_exit_two_with_every_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.scn");
    std::fs::write(&path, "[phi]\na\nb\n\n[generators]\ns = (a c)\nt = (a\n").unwrap();
    let out = symstat(&["validate", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.lines().count() >= 2, "{err}");
    assert!(err.contains("bad.scn:6"), "{err}");
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(symstat(&["validate"]).status.code(), Some(2));
    assert_eq!(symstat(&["reduce", &scenario("example1.scn")]).status.code(), Some(2));
    assert_eq!(symstat(&["validate", "/nonexistent.scn"]).status.code(), Some(2));
    assert_eq!(symstat(&["build", &scenario("triangle.scn"), "--tolerance-profile", "loose"]).status.code(), Some(2));
}

#[test]
fn csv_files_land_in_the_output_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = symstat(&[
        "simulate",
        &scenario("example1.scn"),
        "--experiment",
        "b",
        "--n",
        "200",
        "--lifetime",
        "100",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for name in ["trace.csv", "posterior.csv", "posterior_run1.csv"] {
        assert!(dir.path().join(name).exists(), "{name}");
    }
    let trace = std::fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(trace.lines().next(), Some("run_id,experiment,trial_index,bit"));
    assert_eq!(trace.lines().count(), 201);
}
