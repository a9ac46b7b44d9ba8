//! End-to-end runs of the `spectra` binary: file round trips, output shape and exit codes.

use std::path::PathBuf;
use std::process::{Command, Output};

use spectra::constructions::{debruijn, rootn};
use spectra::io::read_matrix;

fn spectra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectra")).args(args).output().expect("run spectra")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("spectra-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

#[test]
fn rational_construction_round_trips_exactly() {
    for fmt in ["json", "rational-json", "csv"] {
        let path = scratch(&format!("rootn9.{fmt}"));
        let out = spectra(&["construct", "rootn", "9", "--format", fmt, "--out", path.to_str().unwrap()]);
        assert!(out.status.success(), "{fmt}: {}", String::from_utf8_lossy(&out.stderr));
        let back = read_matrix(&path).unwrap();
        assert_eq!(back.rational(), rootn(9).unwrap().rational(), "{fmt}");
        assert!(stdout(&out).starts_with("n=9 precision=rational doubly_stochastic=yes"));
    }
}

#[test]
fn analyze_reports_phi_and_gap() {
    let path = scratch("debruijn3.json");
    assert!(spectra(&["construct", "debruijn", "3", "--out", path.to_str().unwrap()]).status.success());
    assert_eq!(read_matrix(&path).unwrap().rational(), debruijn(3).unwrap().rational());
    let out = spectra(&["analyze", path.to_str().unwrap(), "--phi", "--delta", "--mixing", "0.25", "--mu"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["n"], 8);
    assert_eq!(v["phi"]["value"].as_f64(), Some(0.25));
    assert_eq!(v["delta"]["value"].as_f64(), Some(1.0));
    assert_eq!(v["mixing"]["tau"].as_u64(), Some(3));
}

#[test]
fn analyze_defaults_to_phi_and_delta() {
    let path = scratch("rootn4.json");
    assert!(spectra(&["construct", "rootn", "4", "--out", path.to_str().unwrap()]).status.success());
    let v = json(&spectra(&["analyze", path.to_str().unwrap()]));
    assert!(v.get("phi").is_some() && v.get("delta").is_some());
    assert!(v.get("mixing").is_none());
}

#[test]
fn stdout_matrix_when_no_out_file() {
    let out = spectra(&["construct", "beyond-half", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    // Dimension line, then one line per row.
    assert_eq!(text.lines().count(), 5);
    assert_eq!(text.lines().last(), Some("1,0,0,0"));
    assert!(String::from_utf8_lossy(&out.stderr).contains("n=4"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(spectra(&["construct", "rootn", "10"]).status.code(), Some(2));
    assert_eq!(spectra(&["construct", "kv", "9"]).status.code(), Some(2));
    assert_eq!(spectra(&["analyze", "/nonexistent/m.json"]).status.code(), Some(2));
    assert_eq!(spectra(&["verify", "no-such-suite"]).status.code(), Some(2));
    assert_eq!(spectra(&["frobnicate"]).status.code(), Some(2));

    let garbage = scratch("garbage.json");
    std::fs::write(&garbage, "{ not json").unwrap();
    assert_eq!(spectra(&["analyze", garbage.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn reducible_input_exits_one() {
    let path = scratch("reducible.csv");
    std::fs::write(&path, "2\n1,0\n0,1\n").unwrap();
    let out = spectra(&["analyze", path.to_str().unwrap(), "--phi"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).to_lowercase().contains("irreducible"));
}

#[test]
fn verify_prints_one_line_per_check() {
    let out = spectra(&["verify", "main-theorem", "--trials", "20"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.lines().any(|l| l.starts_with("PASS lower")), "{text}");
    assert!(text.lines().any(|l| l.starts_with("PASS upper")), "{text}");

    let out = spectra(&["--seed", "3", "verify", "tensor-unique", "--trials", "3", "--json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["passed"], true);
}

#[test]
fn chet_scan_and_export_write_csv() {
    let scan = scratch("scan.csv");
    let out = spectra(&["scan", "chet", "5", "7", "--digits", "60", "--out", scan.to_str().unwrap()]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(&scan).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("n,min_c,min_c_index"));
    assert_eq!(lines.filter(|l| l.ends_with(",nonnegative")).count(), 3);

    let out = spectra(&["export", "chet", "5", "--digits", "60", "--places", "10"]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("i,c_i,b_i"));
    // c_1 = 5r/6 − 1/(3r) with r = 5^(-1/4).
    assert!(text.contains("1,0.0588339937,"), "{text}");
}

#[test]
fn export_matrix_reencodes() {
    let src = scratch("kv5.json");
    assert!(spectra(&["construct", "kv", "5", "--out", src.to_str().unwrap()]).status.success());
    let out = spectra(&["export", "matrix", src.to_str().unwrap(), "--format", "rational-json"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["n"], 5);
}

#[test]
fn trace_conjecture_scan_reports_summary() {
    let out = spectra(&["scan", "trace-conjecture", "--k", "2", "--n", "4", "--trials", "50"]);
    assert!(out.status.code() == Some(0) || out.status.code() == Some(1));
    let v = json(&out);
    assert_eq!(v["trials"], 50);
}
