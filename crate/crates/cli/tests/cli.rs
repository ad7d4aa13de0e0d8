use std::path::PathBuf;
use std::process::{Command, Output};

use pirc::tpdb::parse_relative;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn pirc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pirc"))
        .args(args)
        .output()
        .expect("run pirc")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn analyze_json() {
    let path = fixture("size.trs");
    let out = pirc(&["analyze", path.to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["dt_count"], 4);
    assert_eq!(v["pdt_count"], 5);
    assert_eq!(v["sequential"]["bound"]["kind"], "upper_poly");
    assert_eq!(v["parallel"]["bound"]["degree"], 2);
    assert!(v.get("timings").is_none());
}

#[test]
fn analyze_json_is_reproducible() {
    let path = fixture("doubles.trs");
    let args = ["analyze", path.to_str().unwrap(), "--json", "--max-size", "12"];
    assert_eq!(stdout(&pirc(&args)), stdout(&pirc(&args)));
}

#[test]
fn timings_only_on_request() {
    let path = fixture("plus_only.trs");
    let out = pirc(&["analyze", path.to_str().unwrap(), "--json", "--timings"]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(v["timings"].is_object());
}

#[test]
fn unknown_bound_exits_zero() {
    let path = fixture("mod.trs");
    let out = pirc(&["analyze", path.to_str().unwrap(), "--json", "--timeout-secs", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["parallel"]["bound"]["kind"], "unknown");
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.trs");
    assert_eq!(pirc(&["analyze", missing.to_str().unwrap()]).status.code(), Some(1));

    let bad = dir.path().join("bad.trs");
    std::fs::write(&bad, "(VAR x)\n(RULES f(x) -> \n").unwrap();
    let out = pirc(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.trs"));

    assert_eq!(pirc(&["bench", missing.to_str().unwrap()]).status.code(), Some(1));
    assert_eq!(pirc(&["export-relative", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn export_relative_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out_path = dir.path().join("size.rel.trs");
    let path = fixture("size.trs");
    let out = pirc(&["export-relative", path.to_str().unwrap(), out_path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rel = parse_relative(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(rel.strict().len(), 5);
    assert_eq!(rel.weak().len(), 4);
}

#[test]
fn oracle_passes_on_doubles() {
    let path = fixture("doubles.trs");
    let out = pirc(&["oracle", path.to_str().unwrap(), "--max-size", "5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let checks = v["checks"].as_array().unwrap();
    assert!(checks.len() >= 7);
    assert!(checks.iter().all(|c| c["counterexample"].is_null()));
}

#[test]
fn bench_empty_directory() {
    let dir = tempfile::tempdir().unwrap();
    let out = pirc(&["bench", dir.path().to_str().unwrap(), "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 0);
}

#[test]
fn bench_records_bad_files() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::copy(fixture("doubles.trs"), dir.path().join("doubles.trs")).unwrap();
    std::fs::copy(fixture("size.trs"), dir.path().join("size.trs")).unwrap();
    std::fs::write(dir.path().join("broken.trs"), "(RULES").unwrap();
    std::fs::write(dir.path().join("notes.txt"), "ignored").unwrap();
    let out = pirc(&["bench", dir.path().to_str().unwrap(), "--workers", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("analyzed: 2"), "{text}");
    assert!(text.contains("errors: 1"), "{text}");
    assert!(!text.contains("notes.txt"));
}
