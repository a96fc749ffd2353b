mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mps_core::instance::parse_instance;
use mps_core::report::{parse_csv_sections, ComparisonReport};

fn mps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mps"))
        .args(args)
        .env("MPS_THREADS", "2")
        .output()
        .unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn gen_is_deterministic_and_valid() {
    let a = mps(&["gen", "--seed", "11", "--products", "3", "--materials", "4", "--periods", "5"]);
    let b = mps(&["gen", "--seed", "11", "--products", "3", "--materials", "4", "--periods", "5"]);
    let c = mps(&["gen", "--seed", "12", "--products", "3", "--materials", "4", "--periods", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let inst = parse_instance(std::str::from_utf8(&a.stdout).unwrap()).unwrap();
    assert_eq!((inst.n_products(), inst.n_materials(), inst.n_periods()), (3, 4, 5));
}

#[test]
fn output_flag_writes_the_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("inst.json");
    let to_file = mps(&["gen", "--seed", "3", "-o", path.to_str().unwrap()]);
    assert!(to_file.status.success());
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), mps(&["gen", "--seed", "3"]).stdout);
}

#[test]
fn compare_formats_agree() {
    let args = ["compare", "--base-case", "2", "--seed", "5", "--starts", "4"];
    let json = mps(&[&args[..], &["--format", "structured"]].concat());
    assert!(json.status.success(), "{}", String::from_utf8_lossy(&json.stderr));
    let report: ComparisonReport = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(report.models.len(), 3);
    let csv = mps(&[&args[..], &["--format", "csv"]].concat());
    let sections = parse_csv_sections(std::str::from_utf8(&csv.stdout).unwrap()).unwrap();
    assert!(!sections.is_empty());
    let text = mps(&args);
    let text = String::from_utf8(text.stdout).unwrap();
    assert!(text.contains("Total Cost"));
    for m in &report.models {
        assert!(text.contains(m.model.label()));
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Invalid input: malformed JSON.
    let bad = write(dir.path(), "bad.json", "{ not json");
    assert_eq!(mps(&["solve", "--instance", &bad, "--model", "heuristic"]).status.code(), Some(2));
    // Invalid input: negative demand.
    let mut doc: serde_json::Value =
        serde_json::from_slice(&mps(&["gen", "--seed", "1", "--products", "2", "--periods", "2"]).stdout).unwrap();
    doc["demand"][0][0] = (-1.0).into();
    let neg = write(dir.path(), "neg.json", &doc.to_string());
    let out = mps(&["solve", "--instance", &neg, "--model", "milp"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonnegativity"));
    // Infeasible: demand far beyond capacity.
    doc["demand"][0][0] = 1e9.into();
    let inf = write(dir.path(), "inf.json", &doc.to_string());
    assert_eq!(mps(&["solve", "--instance", &inf, "--model", "milp"]).status.code(), Some(1));
    // Limit: oracle refuses a large space.
    let out = mps(&["oracle", "--base-case", "1", "--limit", "10"]);
    assert_eq!(out.status.code(), Some(3));
    // Unknown report format.
    let sched = fixture("base_linear.json");
    let out = mps(&["replay", "--base-case", "1", "--schedule", sched.to_str().unwrap(), "--format", "xml"]);
    assert_eq!(out.status.code(), Some(2));
    // Missing instance source.
    assert_eq!(mps(&["solve", "--model", "milp"]).status.code(), Some(2));
}

#[test]
fn oracle_and_solve_agree_on_tiny_instance() {
    let dir = tempfile::tempdir().unwrap();
    let inst = &common::tiny_instances(1, 10_000)[0];
    let path = write(dir.path(), "tiny.json", &inst.to_json());
    let oracle: serde_json::Value =
        serde_json::from_slice(&mps(&["oracle", "--instance", &path, "--objective", "linear"]).stdout).unwrap();
    let solved: serde_json::Value =
        serde_json::from_slice(&mps(&["solve", "--instance", &path, "--model", "heuristic"]).stdout).unwrap();
    let a = oracle["value"].as_f64().unwrap();
    let b = solved["model_profit"].as_f64().unwrap();
    assert!(common::rel_close(a, b, 1e-12), "{a} vs {b}");
}

#[test]
fn trace_goes_to_stderr() {
    let out = mps(&["solve", "--base-case", "1", "--model", "nlp-int", "--starts", "3", "--trace"]);
    assert!(out.status.success());
    assert!(!out.stderr.is_empty());
    let _: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
}
