use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn punn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_punn")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", &format!("{name}.fcidump")].iter().collect();
    p.to_string_lossy().into_owned()
}

fn sidecar_fci(name: &str) -> f64 {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", &format!("{name}.json")].iter().collect();
    let v: Value = serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap();
    v["fci_energy"].as_f64().unwrap()
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn stdout_json(out: &Output) -> Value {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

const TOY: &str = " &FCI NORB=1,NELEC=2,MS2=0,\n  ORBSYM=1,\n  ISYM=1,\n &END\n\
    0.5 1 1 1 1\n-1.0 1 1 0 0\n0.7 0 0 0 0\n";

const DIAGONAL: &str = " &FCI NORB=2,NELEC=2,MS2=0,\n  ORBSYM=1,1,\n  ISYM=1,\n &END\n\
    0.6 1 1 1 1\n0.4 2 2 2 2\n0.2 1 1 2 2\n-1.5 1 1 0 0\n-0.3 2 2 0 0\n0.1 0 0 0 0\n";

#[test]
fn inspect_h4_matches_reference() {
    let v = stdout_json(&punn(&["inspect", "--fcidump", &fixture("h4_chain_1.0")]));
    assert!((v["fci_energy"].as_f64().unwrap() - sidecar_fci("h4_chain_1.0")).abs() < 1e-8);
    assert_eq!(v["n_orb"], 4);
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["config"]["command"], "inspect");
}

#[test]
fn inspect_single_orbital_toy() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("toy.fcidump");
    std::fs::write(&f, TOY).unwrap();
    let v = stdout_json(&punn(&["inspect", "--fcidump", f.to_str().unwrap()]));
    assert!((v["hf_energy"].as_f64().unwrap() + 0.8).abs() < 1e-15);
}

#[test]
fn missing_file_is_an_input_error() {
    let out = punn(&["inspect", "--fcidump", "/definitely/not/here.fcidump"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn malformed_file_reports_a_line() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.fcidump");
    std::fs::write(&f, " &FCI NORB=1,NELEC=2,MS2=0,\n &END\n0.5 1 1 x 1\n").unwrap();
    let out = punn(&["inspect", "--fcidump", f.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(punn(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(punn(&["train", "--fcidump", "x", "--mode", "sometimes"]).status.code(), Some(1));
    assert_eq!(punn(&["--help"]).status.code(), Some(0));
}

#[test]
fn vqe_h4_is_near_doci_and_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        let out = punn(&["vqe", "--fcidump", &fixture("h4_chain_1.0"), "--seed", "3", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let v = read_json(&a);
    let gap = v["energy"].as_f64().unwrap() - v["doci_energy"].as_f64().unwrap();
    assert!((0.0..1.6e-3).contains(&gap), "gap {gap}");
    assert_eq!(v["seed"], 3);
    let strip = |mut v: Value| {
        v["config"]["args"]["out"] = Value::Null;
        v
    };
    assert_eq!(strip(read_json(&a)), strip(read_json(&b)));
}

#[test]
fn vqe_diagonal_toy_keeps_zero_angles() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("diag.fcidump");
    std::fs::write(&f, DIAGONAL).unwrap();
    let v = stdout_json(&punn(&["vqe", "--fcidump", f.to_str().unwrap()]));
    for t in v["theta"].as_array().unwrap() {
        assert!(t.as_f64().unwrap().abs() < 1e-6);
    }
}

#[test]
fn train_writes_report_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let status = punn(&[
        "train", "--fcidump", &fixture("h4_chain_1.0"), "--steps", "40", "--seeds", "2", "--threads", "2",
        "--out", out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let v = read_json(&out);
    assert_eq!(v["format_version"], 1);
    assert_eq!(v["config"]["args"]["seeds"], 2);
    assert_eq!(v["runs"].as_array().unwrap().len(), 2);
    let fci = sidecar_fci("h4_chain_1.0");
    assert!(v["e_best"].as_f64().unwrap() >= fci - 1e-9);
    let csv = std::fs::read_to_string(dir.path().join("report.trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 41);
}

#[test]
fn hadamard_circuit_reports_both_spreads() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp.json");
    let status = punn(&[
        "train", "--fcidump", &fixture("h4_chain_1.0"), "--mode", "shots", "--shots", "128", "--seeds", "2",
        "--macro-iterations", "2", "--resample-interval", "5", "--circuit", "hadamard", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
    let v = read_json(&out);
    for side in ["puccd", "hadamard"] {
        assert!(v[side]["spread"]["std"].as_f64().is_some());
        assert_eq!(v[side]["runs"].as_array().unwrap().len(), 2);
    }
    let csv = std::fs::read_to_string(dir.path().join("cmp.trace.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 11);
}

#[test]
fn shot_training_is_reproducible() {
    let run = || {
        stdout_json(&punn(&[
            "train", "--fcidump", &fixture("h4_chain_1.0"), "--mode", "shots", "--shots", "64", "--seeds", "1",
            "--macro-iterations", "2", "--resample-interval", "3", "--seed", "7",
        ]))
    };
    assert_eq!(run(), run());
}
