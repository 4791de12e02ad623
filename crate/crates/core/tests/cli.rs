use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sumpaths"))
}

fn corpus(file: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "corpus", file]
        .iter()
        .collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("{e}: {}", String::from_utf8_lossy(&out.stderr));
    })
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

#[test]
fn epr_marginal_is_uniform_for_every_method() {
    let epr = corpus("epr.json");
    for method in ["oracle", "pathsum", "lambda"] {
        let out = run(&[
            "marginal",
            "--circuit",
            &epr,
            "--subsystem",
            "0",
            "--method",
            method,
        ]);
        assert_eq!(code(&out), 0);
        let v = json(&out);
        for j in ["0", "1"] {
            assert!((v["distribution"][j].as_f64().unwrap() - 0.5).abs() < 1e-9);
        }
        assert_eq!(v["schema"], 1);
        assert_eq!(v["command"], "marginal");
    }
}

#[test]
fn lambda_route_is_reported() {
    let out = run(&[
        "marginal",
        "--circuit",
        &corpus("n3_l3_0.json"),
        "--subsystem",
        "0,2",
    ]);
    assert_eq!(json(&out)["route"], "subsystem_general");
    let out = run(&[
        "marginal",
        "--circuit",
        &corpus("n3_l3_0.json"),
        "--subsystem",
        "1",
    ]);
    assert_eq!(json(&out)["route"], "lambda_three");
}

#[test]
fn epr_trace_is_switched_off() {
    let out = run(&["trace", "--circuit", &corpus("epr.json"), "--pair", "0,1"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    let traj = v["trajectory"].as_array().unwrap();
    let expected = [1.0, 0.0, 0.0];
    assert_eq!(traj.len(), 3);
    for (z, e) in traj.iter().zip(expected) {
        assert!((z[0].as_f64().unwrap() - e).abs() < 1e-12);
        assert!(z[1].as_f64().unwrap().abs() < 1e-12);
    }
}

#[test]
fn three_particle_trace_has_branches() {
    let out = run(&[
        "trace",
        "--circuit",
        &corpus("n3_l4_2.json"),
        "--pair",
        "2,5",
        "--endpoint",
        "1",
    ]);
    let v = json(&out);
    assert_eq!(v["route"], "lambda_three");
    assert!(v["closure_error"].as_f64().unwrap() < 1e-10);
    assert_eq!(v["breakdown"]["layers"].as_array().unwrap().len(), 4);
}

#[test]
fn bad_pair_index_is_invalid_input() {
    let out = run(&["trace", "--circuit", &corpus("epr.json"), "--pair", "0,9"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn verify_epr_passes_tightly() {
    let out = run(&["verify", "--circuit", &corpus("epr.json")]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["pass"], true);
    for c in v["checks"].as_array().unwrap() {
        assert!(c["max_error"].as_f64().unwrap() < 1e-12, "{c}");
        assert!(c.get("millis").is_none());
    }
}

#[test]
fn verify_reports_timing_only_on_request() {
    let out = run(&["verify", "--circuit", &corpus("n2_l2_0.json"), "--timing"]);
    assert!(json(&out)["checks"][0]["millis"].is_number());
}

#[test]
fn failed_check_exits_one() {
    let out = run(&["verify", "--circuit", &corpus("n2_l8_0.json"), "--tol", "0"]);
    assert_eq!(code(&out), 1);
    assert_eq!(json(&out)["pass"], false);
}

#[test]
fn non_unitary_file_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(
        &path,
        r#"{"particles": 2, "layers": [{"singles": {"0": [[[1, 0], [1, 0]], [[0, 0], [1, 0]]]}}]}"#,
    )
    .unwrap();
    let out = run(&["verify", "--circuit", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("NonUnitaryGate"));
    assert!(out.stdout.is_empty());
}

#[test]
fn missing_circuit_exits_two() {
    assert_eq!(code(&run(&["marginal"])), 2);
    assert_eq!(
        code(&run(&["marginal", "--circuit", "/nonexistent.json"])),
        2
    );
    assert_eq!(code(&run(&["bogus"])), 2);
}

#[test]
fn budget_exceeded_exits_three() {
    let out = run(&[
        "marginal",
        "--circuit",
        &corpus("n3_l5_0.json"),
        "--method",
        "pathsum",
        "--budget",
        "10",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn epr_demo() {
    let out = run(&["epr", "--a2", "rot:0.3"]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_eq!(v["pass"], true);
    assert!((v["marginals"]["pathsum"]["1"].as_f64().unwrap() - 0.5).abs() < 1e-10);
    let out = run(&["epr", "--a2", "[[[1,0],[1,0]],[[0,0],[1,0]]]"]);
    assert_eq!(code(&out), 2);
    let out = run(&["epr", "--sweep", "20", "--seed", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json(&out)["runs"].as_array().unwrap().len(), 20);
}

#[test]
fn perturb_clamps() {
    let c = corpus("n2_l5_1.json");
    let v = json(&run(&["perturb", "--circuit", &c, "--clamp", "inf"]));
    assert!(v["max_deviation"].as_f64().unwrap() < 1e-12);
    assert_eq!(v["clamp"], "inf");
    let v = json(&run(&["perturb", "--circuit", &c, "--clamp", "0.5"]));
    assert!(v["raw_total"].is_number());
    assert_eq!(
        code(&run(&["perturb", "--circuit", &c, "--clamp", "-1"])),
        2
    );
}

#[test]
fn paths_dump() {
    let v = json(&run(&["paths", "--circuit", &corpus("n2_l1_0.json")]));
    assert_eq!(v["paths"].as_array().unwrap().len(), 1);
    let out = run(&["paths", "--circuit", &corpus("epr.json"), "--endpoint", "2"]);
    assert_eq!(code(&out), 2);
    let out = run(&["paths", "--circuit", &corpus("epr.json"), "--format", "csv"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("path,re,im\n00,"));
}

#[test]
fn csv_marginal() {
    let out = run(&[
        "marginal",
        "--circuit",
        &corpus("epr.json"),
        "--format",
        "csv",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("outcome,probability"));
    for (line, outcome) in lines.zip(["0", "1"]) {
        let (o, p) = line.split_once(',').unwrap();
        assert_eq!(o, outcome);
        assert!((p.parse::<f64>().unwrap() - 0.5).abs() < 1e-9);
    }
}

#[test]
fn shipped_corpus_verifies_and_regenerates() {
    let manifest = corpus("manifest.json");
    let out = run(&["verify", "--manifest", &manifest]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    assert_eq!(v["circuits"].as_array().unwrap().len(), 53);
    let dir = corpus("");
    assert_eq!(code(&run(&["generate", "--corpus", &dir, "--check"])), 0);
}

#[test]
fn generate_is_seeded() {
    let a = run(&[
        "generate",
        "--seed",
        "4",
        "--particles",
        "3",
        "--layers",
        "2",
    ]);
    let b = run(&[
        "generate",
        "--seed",
        "4",
        "--particles",
        "3",
        "--layers",
        "2",
    ]);
    assert_eq!(a.stdout, b.stdout);
    let c = run(&[
        "generate",
        "--seed",
        "5",
        "--particles",
        "3",
        "--layers",
        "2",
    ]);
    assert_ne!(a.stdout, c.stdout);
    let circuit = sumpaths::Circuit::from_json(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert_eq!(circuit.particles(), 3);
}
