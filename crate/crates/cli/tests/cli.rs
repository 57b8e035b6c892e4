use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn lrc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lrc"))
        .args(args)
        .env_remove("LRC_DENSE_LIMIT")
        .output()
        .expect("binary runs")
}

fn circuits() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../circuits")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

const ONE_RESET: &str = r#"{"schema_version":1,"d":2,"codes":{"c":"bitflip3"},
  "registers":[{"name":"a","kind":"logical","code":"c","qudits":[0,1,2]}],
  "gadgets":[{"kind":"reset","register":"a"}]}"#;

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

#[test]
fn verify_single_check_gives_single_entry() {
    let out = lrc(&["verify", "--check", "theorem1", "--code", "bitflip3"]);
    assert_eq!(out.status.code(), Some(0));
    let reports = stdout_json(&out);
    let reports = reports.as_array().unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0]["check"], "theorem1:bitflip3");
    assert_eq!(reports[0]["pass"], true);
    assert_eq!(reports[0]["seed"], 7);
}

#[test]
fn verify_accepts_a_code_file() {
    let dir = tempfile::tempdir().unwrap();
    let code = write(
        dir.path(),
        "zz.json",
        r#"{"d":2,"n":2,"k":1,"stabilizer_generators":["0;0,0;1,1;2"],"pure_error_generators":[],"logical_generators":["0;1,1;0,0;2","0;0,0;1,0;2"]}"#,
    );
    let out = lrc(&[
        "verify",
        "--check",
        "theorem1",
        "--check",
        "orthogonality",
        "--code",
        &code,
    ]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let reports = stdout_json(&out);
    assert_eq!(reports[0]["check"], "theorem1:custom[2,1,d=2]");
    assert_eq!(reports.as_array().unwrap().len(), 2);
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        vec!["verify", "--check", "no_such_check"],
        vec!["verify"],
        vec!["verify", "--check", "theorem1", "--code", "steane"],
        vec!["toffoli", "--delta", "nan"],
        vec!["sample", "--shots", "0"],
        vec!["syndrome", "--flip", "0.7"],
        vec!["compile", "/nonexistent/circuit.json"],
        vec!["frobnicate"],
    ] {
        let out = lrc(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn csv_reports_have_the_documented_header() {
    let out = lrc(&["verify", "--check", "orthogonality", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("check,pass,value,tolerance,runtime_ms,seed")
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r.split(',').nth(1) == Some("true")));
}

#[test]
fn compile_one_reset_exhaustively_gives_four_instances() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "reset.json", ONE_RESET);
    let out = lrc(&["compile", &path, "--mode", "exhaustive"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let records: Vec<Value> = text
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect();
    assert_eq!(records.len(), 4);
    // One record per stabilizer of the bit-flip code.
    let mut elements: Vec<&str> = records
        .iter()
        .map(|r| r["insertions"][0]["element"].as_str().unwrap())
        .collect();
    elements.sort_unstable();
    assert_eq!(elements, ["III", "IZZ", "ZIZ", "ZZI"]);
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r["schema_version"], 1);
        assert_eq!(r["instance"]["index"], i as u64);
        assert!(r["classical_post"].as_array().unwrap().is_empty());
    }
}

#[test]
fn compile_honours_policy_files_and_overrides() {
    let c = circuits();
    let circuit = c.join("bitflip3_memory.json");
    let policy = c.join("policy_sampled.json");
    let out = lrc(&[
        "compile",
        circuit.to_str().unwrap(),
        "--policy",
        policy.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 8);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["instance"]["seed"], 11);
    let out = lrc(&[
        "compile",
        circuit.to_str().unwrap(),
        "--policy",
        policy.to_str().unwrap(),
        "--mode",
        "sampled=3",
        "--seed",
        "5",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    let first: Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(first["instance"]["seed"], 5);
}

#[test]
fn invalid_circuits_report_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let bad_schema = write(
        dir.path(),
        "a.json",
        r#"{"schema_version":1,"d":2,"registers":[{"name":"a"}]}"#,
    );
    let out = lrc(&["compile", &bad_schema]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("registers[0]"));

    let bad_rule = write(
        dir.path(),
        "b.json",
        &ONE_RESET.replace(r#""register":"a""#, r#""register":"b""#),
    );
    let out = lrc(&["compile", &bad_rule]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("gadget 0"));
}

#[test]
fn exhaustive_over_the_cap_is_an_input_error() {
    let path = circuits().join("qutrit_syndrome.json");
    let out = lrc(&["compile", path.to_str().unwrap(), "--mode", "exhaustive"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("capacity"));
}

#[test]
fn dense_limit_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_lrc"))
        .args(["verify", "--check", "theorem1", "--code", "five_one_three"])
        .env("LRC_DENSE_LIMIT", "16")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("limit is 16"));
    let out = Command::new(env!("CARGO_BIN_EXE_lrc"))
        .args(["verify", "--check", "orthogonality"])
        .env("LRC_DENSE_LIMIT", "lots")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn toffoli_reports_block_three_populations() {
    let out = lrc(&["toffoli", "--delta", "0.1"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    let pops = &doc["result"]["after"]["populations"];
    let p0 = pops["0,0"].as_f64().unwrap();
    assert!((p0 - 0.990033).abs() < 5e-7, "{p0}");
    let rest: f64 = pops
        .as_object()
        .unwrap()
        .iter()
        .filter(|(k, _)| *k != "0,0")
        .map(|(_, v)| v.as_f64().unwrap())
        .sum();
    assert!((rest - 0.009967).abs() < 5e-7, "{rest}");
    assert!(doc["result"]["before"]["inter_cospace"].as_f64().unwrap() > 0.19);

    let out = lrc(&["toffoli", "--delta", "0", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("check,pass,value,tolerance,runtime_ms,seed\n"));
    assert!(text.contains("toffoli:fidelity_delta0,true,0e0,"));
}

#[test]
fn syndrome_emits_the_confusion_matrix() {
    let out = lrc(&["syndrome", "--flip", "0.1", "--idle-theta", "0"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    let c = &doc["confusion"];
    assert!((c[0][0].as_f64().unwrap() - 0.9).abs() < 1e-10);
    assert!((c[1][0].as_f64().unwrap() - 0.1).abs() < 1e-10);
}

#[test]
fn out_flag_writes_the_file_and_timings_are_opt_in() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let out = lrc(&["sample", "--shots", "1000", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["reports"][0]["runtime_ms"], 0);
    assert_eq!(doc["seed"], 7);
}
