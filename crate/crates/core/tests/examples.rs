//! Runs every example binary built alongside the tests.

use std::path::PathBuf;
use std::process::Command;

fn example(name: &str) -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    let dir = exe.parent().unwrap().parent().unwrap().join("examples");
    dir.join(format!("{name}{}", std::env::consts::EXE_SUFFIX))
}

fn run(name: &str, args: &[&str]) -> String {
    let path = example(name);
    assert!(path.exists(), "{} not built", path.display());
    let out = Command::new(&path).args(args).output().unwrap();
    assert!(
        out.status.success(),
        "{name}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn epr_demo() {
    let out = run("epr_demo", &["1.1"]);
    assert!(out.contains("P(A=0) = 0.500000000000000"));
    assert!(!out.contains("FAIL"));
}

#[test]
fn two_particle_lambda() {
    let out = run("two_particle_lambda", &[]);
    assert!(out.contains("ordered pairs"));
}

#[test]
fn three_particle_hits() {
    assert!(run("three_particle_hits", &[]).contains("A-C"));
}

#[test]
fn subsystem_marginals() {
    assert_eq!(run("subsystem_marginals", &[]).lines().count(), 11);
}

#[test]
fn density_split() {
    assert!(run("density_split", &[]).contains("t=4"));
}

#[test]
fn perturbation() {
    assert!(run("perturbation", &[]).contains("inf"));
}

#[test]
fn path_sums() {
    assert!(run("path_sums", &[]).contains("paths of particle 1"));
}

#[test]
fn corpus_verify() {
    let out = run("corpus_verify", &[]);
    assert!(out.ends_with("overall: PASS\n"));
    assert!(out.contains("matching the generator: all"));
}
