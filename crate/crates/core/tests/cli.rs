use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn tribell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tribell"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_ok(args: &[&str]) -> Value {
    let out = tribell(args);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn num(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn decompose_ghz_and_mixed() {
    let v = json_ok(&["decompose", &fixture("ghz.json")]);
    assert_eq!(num(&v["Q"][0][0][0]), 1.0);
    assert_eq!(num(&v["Q"][0][1][1]), -1.0);
    assert_eq!(num(&v["Q"][1][0][1]), -1.0);
    assert_eq!(num(&v["Q"][1][1][0]), -1.0);
    for key in ["alpha", "beta", "gamma", "R", "S", "T", "Q", "invariant_norms", "q_norm"] {
        assert!(v.get(key).is_some(), "{key}");
    }

    let v = json_ok(&["decompose", &fixture("mixed-identity.json")]);
    assert_eq!(num(&v["invariant_norms"]["two_body"]), 0.0);
    assert_eq!(num(&v["invariant_norms"]["q_local"]), 0.0);
    let all_zero = |x: &Value| x.to_string().chars().all(|c| !c.is_ascii_digit() || c == '0');
    for key in ["alpha", "beta", "gamma", "R", "S", "T", "Q"] {
        assert!(all_zero(&v[key]), "{key}: {}", v[key]);
    }
}

#[test]
fn malformed_norm_exits_2_naming_norm() {
    let out = tribell(&["decompose", &fixture("malformed-norm.json")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("norm"));
}

#[test]
fn missing_file_and_bad_args_exit_2() {
    assert_eq!(tribell(&["decompose", "/nonexistent.json"]).status.code(), Some(2));
    assert_eq!(tribell(&["evaluate", "builtin:ghz", "builtin:all-x", "-i", "0"]).status.code(), Some(2));
    assert_eq!(tribell(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(tribell(&["optimize", "builtin:ghz"]).status.code(), Some(2));
}

#[test]
fn settings_file_rejects_non_unit_rows() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"a": [[1,0,0],[1,0,0],[0.9,0,0]], "b": [[1,0,0],[1,0,0],[1,0,0]]}"#).unwrap();
    let out = tribell(&["evaluate", "builtin:ghz", path.to_str().unwrap(), "-i", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn evaluate_examples() {
    let v = json_ok(&["evaluate", &fixture("ghz.json"), &fixture("all-x.json"), "-i", "1"]);
    assert_eq!(num(&v["value"]), 1.0);
    let v = json_ok(&["evaluate", &fixture("000.json"), &fixture("all-z.json"), "-i", "2"]);
    assert_eq!(num(&v["value"]), 1.0);
    let v = json_ok(&["evaluate", &fixture("mixed-identity.json"), &fixture("all-x.json"), "-i", "3"]);
    assert_eq!(num(&v["value"]), 0.0);
}

#[test]
fn optimize_examples() {
    let v = json_ok(&["optimize", &fixture("ghz.json"), "-i", "1", "--starts", "8"]);
    assert!((num(&v["value"]) - std::f64::consts::SQRT_2).abs() < 1e-6);
    assert_eq!(v["settings"]["a"].as_array().unwrap().len(), 3);
    assert!(v["telemetry"]["monotonicity_violations"].as_u64() == Some(0));

    let v = json_ok(&["optimize", &fixture("000.json"), "-i", "1", "--starts", "8"]);
    assert!((num(&v["value"]) - 1.0).abs() < 1e-6);

    let v = json_ok(&["optimize", &fixture("000.json"), "--omega", "--starts", "8"]);
    assert!((num(&v["value"]) - 3.0).abs() < 1e-6);
}

// Optimized settings feed straight back into `evaluate`.
#[test]
fn optimized_settings_round_trip() {
    let out = tribell(&["optimize", "builtin:ghz", "-i", "2", "--starts", "4", "--seed", "9"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("settings.json");
    std::fs::write(&path, v["settings"].to_string()).unwrap();
    let e = json_ok(&["evaluate", "builtin:ghz", path.to_str().unwrap(), "-i", "2"]);
    assert!((num(&e["value"]) - num(&v["signed_value"])).abs() < 1e-7);
}

#[test]
fn classify_examples() {
    let labels = |v: &Value| -> Vec<String> {
        v["excluded"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().to_string()).collect()
    };
    let v = json_ok(&["classify", &fixture("ghz.json"), "--starts", "8"]);
    assert_eq!(labels(&v).len(), 4);
    let v = json_ok(&["classify", &fixture("phi-plus-otimes-0.json"), "--starts", "8"]);
    assert_eq!(labels(&v), ["fully-separable", "1-23", "2-13"]);
    let v = json_ok(&["classify", &fixture("000.json"), "--starts", "8"]);
    assert!(labels(&v).is_empty());
}

fn sample_rows(class: &str, n: &str, seed: &str) -> Vec<Vec<String>> {
    let out = tribell(&["sample", "--class", class, "-n", n, "--seed", seed]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("d1,d2,d3,class"));
    lines.map(|l| l.split(',').map(String::from).collect()).collect()
}

#[test]
fn sample_examples() {
    let rows = sample_rows("fully-separable", "100", "3");
    assert_eq!(rows.len(), 100);
    for r in &rows {
        for x in &r[..3] {
            assert!(x.parse::<f64>().unwrap().abs() <= 1.0 + 1e-9);
        }
        assert_eq!(r[3], "fully-separable");
    }
    let rows = sample_rows("haar-pure", "100", "3");
    for r in &rows {
        let sq: f64 = r[..3].iter().map(|x| x.parse::<f64>().unwrap().powi(2)).sum();
        assert!(sq <= 3.0 + 1e-9);
    }
    let a = tribell(&["sample", "--class", "1-23", "-n", "20", "--seed", "5"]).stdout;
    let b = tribell(&["sample", "--class", "1-23", "-n", "20", "--seed", "5"]).stdout;
    assert_eq!(a, b);
    assert_eq!(tribell(&["sample", "--class", "bogus", "-n", "2"]).status.code(), Some(2));
}

fn figure(plane: &str, csv: &str) -> Output {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("in.csv");
    std::fs::write(&path, csv).unwrap();
    tribell(&["figure", "--plane", plane, path.to_str().unwrap()])
}

#[test]
fn figure_examples() {
    let out = figure("12", "d1,d2,d3,class\n0.5,0.5,0,x\n1.3,0.2,0,x\n0.2,1.3,0,x\n1.2,1.2,0,x\n");
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let regions: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(2).unwrap()).collect();
    assert_eq!(text.lines().next(), Some("u,v,region,class"));
    assert_eq!(regions, ["I", "II", "III", "corner"]);

    let out = figure("12", "d1,d2,d3,class\n0.5,0.5,0,x\n0.5,oops,0,x\n");
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn figure_reads_stdin() {
    use std::io::Write;
    use std::process::Stdio;
    let mut child = Command::new(env!("CARGO_BIN_EXE_tribell"))
        .args(["figure", "--plane", "23"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(b"d1,d2,d3,class\n0.1,0.2,-0.3,haar-pure\n")
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "u,v,region,class\n0.2,-0.3,I,haar-pure\n");
}
