use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../bellbound/tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellbound")).args(args).output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let mut full = args.to_vec();
    full.extend(["--format", "json"]);
    let out = run(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn classical_bound_from_file() {
    let v = json(&["classical-bound", "--functional", &fixture("chsh.json")]);
    assert_eq!(v["tool"], "bellbound");
    assert_eq!(v["config"]["command"]["command"], "classical-bound");
    assert_eq!(v["result"]["b_sup"], 2.0);
    assert_eq!(v["result"]["b_inf"], -2.0);
    // witnesses are reported with 1-based outcomes
    assert_eq!(v["result"]["witness_sup"], serde_json::json!([[1, 1], [1, 1]]));
}

#[test]
fn violation_with_fixed_measurements() {
    let v = json(&["violation", "--state", &fixture("singlet_state.json"), "--povm", &fixture("tsirelson_povms.json")]);
    let ups = v["result"]["upsilon"].as_f64().unwrap();
    assert!((ups - std::f64::consts::SQRT_2).abs() < 1e-9);
}

#[test]
fn certify_lhv_separates_product_from_singlet() {
    let product = json(&["certify-lhv", "--state", "product:N=2,d=2"]);
    assert_eq!(product["result"]["certified"], true);
    let singlet = json(&["certify-lhv", "--state", "singlet"]);
    assert_eq!(singlet["result"]["certified"], false);
}

#[test]
fn dilation_export_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let v = json(&["bound-from-dilation", "--state", "singlet", "--settings", "2", "--export", path.to_str().unwrap()]);
    let bound = v["result"]["bound"].as_f64().unwrap();
    assert!(bound >= std::f64::consts::SQRT_2 - 1e-3 && bound <= 3f64.sqrt() + 1e-2, "{bound}");
    let exported: bellbound::io::ComplexMatrixJson = bellbound::io::read_json(&path).unwrap();
    // two copies of one qubit, one of the other
    assert_eq!(exported.to_matrix().unwrap().nrows(), 8);
}

#[test]
fn bounds_table_defaults_to_csv() {
    let out = run(&["bounds-table", "--state", "singlet", "--settings", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("bound_name,formula,value,applicable\n"));
    assert!(text.contains("\nsinglet,sqrt(3),"));
}

#[test]
fn text_output_rounds_to_six_decimals() {
    let out = run(&["violation", "--state", "singlet", "--optimize", "chsh", "--format", "text"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("upsilon: 1.414214\n"), "{text}");
}

#[test]
fn malformed_input_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"scenario\": \n").unwrap();
    let out = run(&["classical-bound", "--functional", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    assert_eq!(run(&["violation", "--state", "nonsense"]).status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_bellbound"))
        .args(["classical-bound", "--functional", "chsh"])
        .env("BELLBOUND_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn violated_bound_exits_with_code_four() {
    let out = run(&["bounds-table", "--state", "singlet", "--settings", "2", "--violation", "5"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(run(&["bounds-table", "--state", "singlet", "--settings", "2", "--violation", "1.4"]).status.success());
}

#[test]
fn identical_seeds_give_identical_reports() {
    let args = ["violation", "--state", "ghz:N=3,d=2", "--settings", "2", "--outcomes", "2", "--seed", "3", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}
