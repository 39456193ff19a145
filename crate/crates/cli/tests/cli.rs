use std::path::PathBuf;
use std::process::{Command, Output};

use aeqs_core::doc::HamiltonianDoc;
use serde_json::Value;

fn aeqs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aeqs")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name).display().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("{key} missing in {v}"))
}

fn last_row(csv: &[u8]) -> Vec<f64> {
    let text = String::from_utf8_lossy(csv);
    text.lines().last().unwrap().split(',').map(|f| f.parse().unwrap()).collect()
}

#[test]
fn run_exit_codes_follow_the_verdict() {
    let out = aeqs(&["run", "equal", "ab", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["outcome"], "accept");
    assert!(num(&v, "ground_energy").abs() < 1e-9);

    let out = aeqs(&["run", "sym_coin", "ab", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["outcome"], "reject");
    assert!((num(&v, "ground_energy") - 2.0 / 3.0).abs() < 1e-9);

    assert_eq!(aeqs(&["run", "equal", ""]).status.code(), Some(0));
}

#[test]
fn degenerate_ground_state_exits_two() {
    let out = aeqs(&["run", "multdup", "00#11", "--json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["outcome"], "indeterminate");
}

#[test]
fn usage_and_runtime_errors() {
    assert_eq!(aeqs(&["bogus"]).status.code(), Some(3));
    assert_eq!(aeqs(&["run", "equal"]).status.code(), Some(3));
    assert_eq!(aeqs(&["verify", "equal"]).status.code(), Some(3));
    assert_eq!(aeqs(&["--help"]).status.code(), Some(0));
    assert_eq!(aeqs(&["--version"]).status.code(), Some(0));
    let out = aeqs(&["run", "nonesuch", "ab"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("nonesuch"));
    assert_eq!(aeqs(&["run", "equal", "abc"]).status.code(), Some(4));
    assert_eq!(aeqs(&["run", "missing.json", "1"]).status.code(), Some(4));
}

#[test]
fn trace_rows_and_methods_agree() {
    let trotter = aeqs(&["trace", "l_prefix", "0", "--T", "8", "--R", "256", "--method", "trotter"]);
    assert_eq!(trotter.status.code(), Some(0));
    let text = String::from_utf8_lossy(&trotter.stdout);
    assert_eq!(text.lines().next(), Some("j,s,ground_energy,overlap_sq,norm"));
    assert_eq!(text.lines().count(), 257);
    assert!(String::from_utf8_lossy(&trotter.stderr).contains("final overlap^2"));

    let phase = aeqs(&["trace", "l_prefix", "0", "--T", "8", "--R", "256", "--method", "phase"]);
    assert_eq!(phase.status.code(), Some(0));
    let (a, b) = (last_row(&trotter.stdout), last_row(&phase.stdout));
    assert!(a.iter().zip(&b).all(|(x, y)| (x - y).abs() < 1e-6), "{a:?} vs {b:?}");
}

#[test]
fn trace_at_zero_time_is_one_row() {
    let out = aeqs(&["trace", "l_prefix", "0", "--T", "0", "--format", "json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 1);
    assert!((num(&records[0], "norm") - 1.0).abs() < 1e-12);
}

#[test]
fn verify_sweeps() {
    let out = aeqs(&["verify", "l_prefix", "--max-len", "6", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["passed"], true);
    assert_eq!(v["checked"], 126);

    let out = aeqs(&["verify", "usubsum", "--max-params", "t≤3,k≤2,l≤2"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));

    let out = aeqs(&["verify", "l_prefix", "--max-len", "0"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 inputs"));
}

#[test]
fn verify_reports_mismatches() {
    let out = aeqs(&["verify", "multdup", "--max-params", "k<=2,l<=2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("MISMATCH \"00#11\""));
}

#[test]
fn compile_parity_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("parity.out.json");
    let out = aeqs(&["compile", &fixture("parity.json"), "11", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["schema"], 1);
    assert!((num(&v, "spectral_gap") - 1.0).abs() < 1e-12);
    assert!(num(&v, "ground_energy").abs() < 1e-12);
    assert_eq!(v["basis"][0]["labels"], serde_json::json!(["even", "odd"]));

    let fin: HamiltonianDoc = serde_json::from_value(v["h_fin"].clone()).unwrap();
    let again = HamiltonianDoc::from(&fin.to_hamiltonian().unwrap());
    assert_eq!(serde_json::to_value(&again).unwrap(), v["h_fin"]);

    let again = aeqs(&["compile", &fixture("parity.json"), "11"]);
    assert_eq!(json(&again), v, "output is deterministic");
}

#[test]
fn compile_identity_moqqaf_gives_lambda0() {
    let out = aeqs(&["compile", &fixture("identity.json"), "aa"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let fin: HamiltonianDoc = serde_json::from_value(v["h_fin"].clone()).unwrap();
    let d = fin.to_hamiltonian().unwrap().to_dense();
    for i in 0..4 {
        for j in 0..4 {
            let expected = match (i, j) {
                (0, 0) => 1.0 / 3.0,
                _ if i == j => 1.0,
                _ => 0.0,
            };
            assert!((d[(i, j)].re - expected).abs() < 1e-15 && d[(i, j)].im == 0.0);
        }
    }
    let meta = json(&aeqs(&["compile", &fixture("identity.json"), "aa", "--emit", "metadata"]));
    assert!(meta.get("h_fin").is_none());
}

#[test]
fn gap_and_listing() {
    let out = aeqs(&["gap", "equal", "ab", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert!((num(&v, "spectral_gap") - 1.0).abs() < 1e-9);
    assert!(num(&v, "minimum_gap") > 0.0);

    let v = json(&aeqs(&["gallery-list", "--json"]));
    assert_eq!(v["entries"].as_array().unwrap().len(), 7);
}

#[test]
fn seed_is_global() {
    assert_eq!(aeqs(&["--seed", "7", "run", "equal", "ab"]).status.code(), Some(0));
    assert_eq!(aeqs(&["run", "equal", "ab", "--seed", "7"]).status.code(), Some(0));
}
