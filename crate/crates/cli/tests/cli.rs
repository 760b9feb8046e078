use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn rotwalk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rotwalk")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn spectrum_csv_has_one_row_per_frequency() {
    let o = rotwalk(&["spectrum", "--angle", "golden", "--series", "1:1", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<_> = text.lines().collect();
    assert!(lines[0].starts_with("# config: "));
    assert_eq!(lines[1], "n,eigenvalue,kv_term,sigma2_term");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("1,"));
}

#[test]
fn resonance_is_a_mathematical_error() {
    let o = rotwalk(&["spectrum", "--angle", "1/2", "--series", "2:1"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("frequency 2"));
}

#[test]
fn empty_series_gives_zero_report() {
    let o = rotwalk(&["spectrum", "--angle", "1/3", "--series", "0"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["kv_partial"], 0.0);
    assert_eq!(v["result"]["rows"].as_array().unwrap().len(), 0);
}

#[test]
fn zero_observable_never_exceeds() {
    let o = rotwalk(&["tail", "--angle", "golden", "--series", "0", "--steps", "50", "--trials", "200", "--threshold", "0"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["estimate"], 0.0);
    assert_eq!(v["config"]["seed"], 1);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&rotwalk(&["tail", "--angle", "golden"])), 1);
    assert_eq!(code(&rotwalk(&["spectrum", "--angle", "x/y", "--series", "1:1"])), 1);
    let o = rotwalk(&["preset", "nope"]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8_lossy(&o.stderr).to_string();
    for name in ["golden-c1", "lemma1-faithful", "lemma3"] {
        assert!(err.contains(name), "{err}");
    }
    assert_eq!(code(&rotwalk(&["--help"])), 0);
}

#[test]
fn toy_construction_writes_three_verifiable_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("toy");
    let o = rotwalk(&["construct", "--theorem", "1", "--s", "0.6", "--depth", "3", "--toy", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["ledger.json", "angle.json", "series.json"] {
        let v = read(&out.join(f));
        assert_eq!(v["config"]["command"], "construct");
    }
    let ledger = out.join("ledger.json");
    assert_eq!(read(&ledger)["result"]["levels"].as_array().unwrap().len(), 3);

    let ok = rotwalk(&["verify", ledger.to_str().unwrap()]);
    assert_eq!(code(&ok), 0);
    assert_eq!(json(&ok)["result"]["pass"], true);

    let text = std::fs::read_to_string(&ledger).unwrap().replacen("\"n\": \"1025\"", "\"n\": \"1024\"", 1);
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text).unwrap();
    let o = rotwalk(&["verify", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("threshold[1]"));
}

#[test]
fn infeasible_construction_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = rotwalk(&["construct", "--theorem", "1", "--depth", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn smooth_construction_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let o = rotwalk(&["construct", "--theorem", "2", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let ledger = read(&dir.path().join("ledger.json"));
    assert_eq!(ledger["result"]["s"], "11/20");
    assert_eq!(code(&rotwalk(&["verify", dir.path().join("ledger.json").to_str().unwrap()])), 0);
}

#[test]
fn embedded_config_reproduces_output() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let o = rotwalk(&[
        "tail", "--angle", "golden", "--series", "1:1/2,3:1/4", "--steps", "300", "--trials", "2000", "--threshold", "0.2",
        "--seed", "42", "--threads", "4", "--out", a.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let o = rotwalk(&["run", a.to_str().unwrap(), "--threads", "1", "--out", b.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(read(&a)["result"]["seed"], 42);
}

#[test]
fn exact_cross_check_agrees() {
    let o = rotwalk(&[
        "exact", "--angle", "golden", "--series", "1:1/2,3:1/4", "--steps", "8", "--threshold", "0.3", "--cross-check", "100000",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(json(&o)["result"]["agree"], true);
}

#[test]
fn lemma3_preset_reports_tail_estimate() {
    let o = rotwalk(&["preset", "lemma3", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["params"]["n"], "6250");
    let tail = &v["result"]["tail"];
    assert!(tail["estimate"].as_f64().unwrap() > 0.0);
    assert!(tail["interval"]["lo"].as_f64().unwrap() <= tail["interval"]["hi"].as_f64().unwrap());
}

#[test]
fn lemma1_preset_certifies() {
    let o = rotwalk(&["preset", "lemma1-faithful"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["certificate"]["n"], "5800");
    assert_eq!(v["result"]["certificate"]["alpha"], "23200/69601");
    assert_eq!(v["result"]["certificate"]["containment_holds"], true);
    assert_eq!(v["result"]["supports"], true);
}

#[test]
fn golden_preset_scans() {
    let o = rotwalk(&["preset", "golden-c1", "--trials", "500", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().nth(1) == Some("eps,cutoff,kv_partial"));
    assert!(text.lines().count() > 30);
}

#[test]
fn chain_reports_mixing() {
    let o = rotwalk(&["chain", "--q", "5", "--p", "1", "--horizon", "64"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    assert_eq!(v["result"]["mixing"]["holds"], true);
    assert!((v["result"]["bound"]["rho"].as_f64().unwrap() - (std::f64::consts::PI / 5.0).cos()).abs() < 1e-12);
    assert_eq!(code(&rotwalk(&["chain", "--q", "4", "--p", "1"])), 1);
}
