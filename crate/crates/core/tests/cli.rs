use std::path::Path;
use std::process::{Command, Output};

use listdec::bounds::REGIME_CSV_HEADER;
use listdec::config::Budgets;
use listdec::harness::ExperimentReport;
use listdec::linear_code::LinearCode;
use listdec::oracle::{verify_certificate, Certificate};

fn listdec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_listdec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(out: &Output) -> ExperimentReport {
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

#[test]
fn violated_check_writes_a_verifiable_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cert.json");
    let out = listdec(&[
        "oracle",
        "check",
        "--code",
        "rs:q=5,k=2",
        "--radius",
        "3/5",
        "--list",
        "2",
        "--mode",
        "average",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let rep: ExperimentReport = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(!rep.verdicts["decodable"]);
    assert!(rep.verdicts["certificate_verifies"]);
    let cert: Certificate = serde_json::from_value(rep.tables["certificate"].clone()).unwrap();
    assert!(cert.witness.is_some());

    let code_out = listdec(&["code", "serialize", "--code", "rs:q=5,k=2"]);
    let code: LinearCode = serde_json::from_slice(&code_out.stdout).unwrap();
    assert!(verify_certificate(&code, &cert, &Budgets::default()).unwrap());
}

#[test]
fn decodable_check_exits_zero() {
    // distance 4/5, so radius 1/5 leaves at most one codeword
    let out = listdec(&["oracle", "check", "--code", "rs:q=5,k=2", "--radius", "1/5", "--list", "1"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(report(&out).verdicts["decodable"]);
}

#[test]
fn serialized_code_round_trips_through_code_flag() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("code.json");
    let out = listdec(&[
        "--seed",
        "9",
        "code",
        "serialize",
        "--code",
        "hadamard:q=3,k=2",
        "--sample",
        "5",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let info = report(&listdec(&["code", "info", "--code", path.to_str().unwrap()]));
    assert_eq!(info.measured["n"].value, 5.0);
    assert_eq!(info.measured["k"].value, 2.0);
}

#[test]
fn suite_exit_mirrors_result() {
    assert_eq!(listdec(&["suite", "--scope", "galois"]).status.code(), Some(0));
    // a near-zero tolerance makes the statistical checks fail
    let out = listdec(&["suite", "--scope", "chaining", "--tolerance", "0.000001"]);
    assert_eq!(out.status.code(), Some(1));
    let rep = report(&out);
    assert!(rep.verdicts["chaining::net_postconditions"]);
    assert!(!rep.verdicts["chaining::variance_exactness"]);
}

#[test]
fn bounds_table_csv_has_regime_rows() {
    let out = listdec(&["--format", "csv", "bounds", "table", "--q", "2,16,256", "--eps", "0.05,0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], REGIME_CSV_HEADER);
    assert_eq!(lines.len(), 1 + 6);
    let cols = REGIME_CSV_HEADER.split(',').count();
    assert!(lines.iter().all(|l| l.split(',').count() == cols));
}

#[test]
fn usage_and_infeasibility_exit_two() {
    let out = listdec(&["transmogrify"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
    assert_eq!(listdec(&["oracle", "check", "--code", "rs:q=5,k=2"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"budgets": {"max_received_words": 10}}"#).unwrap();
    let out = listdec(&[
        "--config",
        cfg.to_str().unwrap(),
        "oracle",
        "profile",
        "--code",
        "rs:q=7,k=2,n=5",
        "--max-list",
        "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("budget"));
}

#[test]
fn timing_is_outside_the_canonical_report() {
    let args = ["--seed", "3", "experiment", "beyond-johnson", "--seeds", "2", "--max-list", "2"];
    let plain = listdec(&args);
    let mut timed_args = args.to_vec();
    timed_args.push("--timing");
    let timed = report(&listdec(&timed_args));
    assert!(timed.wall_clock_ms.is_some());
    assert_eq!(timed.canonical_json().unwrap() + "\n", String::from_utf8(plain.stdout).unwrap());
}

#[test]
fn corollary_and_chain_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"constants": {"y_constant": 0.0025}}"#).unwrap();
    let out = listdec(&[
        "--config",
        cfg.to_str().unwrap(),
        "experiment",
        "corollary",
        "--variant",
        "small-q",
        "--q",
        "5",
        "--eps",
        "0.5",
        "--k",
        "2",
        "--draws",
        "5",
        "--require-success-rate",
        "0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rep = report(&out);
    assert!(rep.measured["blocklength"].value <= 6.0);
    assert!(rep.verdicts["success_rate"]);

    let out = listdec(&[
        "--format", "csv", "chain", "build", "--code", "hadamard:q=3,k=4", "--list", "16", "--t-max", "2", "--eta", "0.25",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("t,size,heavy,mass,mass_bound,distance,width_bound"));
    assert_eq!(text.lines().count(), 1 + 3);
}

#[test]
fn config_file_must_exist() {
    let out = listdec(&["--config", "/nonexistent/cfg.json", "field", "--q", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!Path::new("/nonexistent/cfg.json").exists());
}
