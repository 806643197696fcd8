use std::process::{Command, Output};

use kurzweil::witness::CertificateJson;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kurzweil")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn sum_example_is_exact() {
    let out = run(&["sum", "--x", "rat:1/2", "--y", "rat:1/4", "--ell", "1", "--N", "8", "--d", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["partial"]["value"], "2");
    assert_eq!(v["partial"]["exact"], true);
}

#[test]
fn rational_example() {
    let v = json(&run(&["rational", "--x", "rat:1/2", "--y", "rat:1/3"]));
    assert_eq!(v["contains_integer"], false);
    assert_eq!(v["phi_membership"], "non-member");
    let v = json(&run(&["rational", "--x", "rat:1/3", "--y", "rat:2/3"]));
    assert_eq!(v["least_n"], "1");
    assert_eq!(v["modulus"], "3");
}

#[test]
fn golden_records_are_fibonacci() {
    let out = run(&["records", "--x", "cf:[1;(1)]", "--y", "rat:0/1", "--N", "100"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,delta,delta_exact"));
    let times: Vec<u64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(times, [1, 2, 3, 5, 8, 13, 21, 34, 55, 89]);
}

#[test]
fn exit_codes_follow_the_taxonomy() {
    let parse = run(&["sum", "--x", "bogus", "--y", "rat:0/1", "--N", "3"]);
    assert_eq!(parse.status.code(), Some(2));
    assert_eq!(json(&parse)["error"]["kind"], "parse");
    let precision = run(&["records", "--x", "dec:0.2~1e-30", "--y", "rat:1/5", "--N", "3", "--format", "json"]);
    assert_eq!(precision.status.code(), Some(3));
    assert_eq!(json(&precision)["error"]["kind"], "undecided");
    let domain = run(&["sum", "--x", "rat:1/2", "--y", "rat:1/3", "--ell", "0", "--N", "4"]);
    assert_eq!(domain.status.code(), Some(4));
    let rejected = run(&["witness", "--x", "cf:[1;(1)]", "--source", "brute:10000", "--K", "3"]);
    assert_eq!(rejected.status.code(), Some(4));
    assert_eq!(json(&rejected)["error"]["kind"], "no-admissible");
    assert_eq!(run(&["records", "--x", "rat:1/2"]).status.code(), Some(2));
}

#[test]
fn sweeps_are_deterministic() {
    let args = ["rational", "--random", "200", "--seed", "11", "--max-den", "50", "--d", "2"];
    let a = run(&args);
    let b = run(&[&args[..], &["--jobs", "1"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["rational", "--random", "200", "--seed", "12", "--max-den", "50", "--d", "2"]);
    assert_ne!(a.stdout, c.stdout);
    let grid = json(&run(&["rational", "--grid", "5"]));
    // 0 plus the reduced fractions with denominator ≤ 5
    assert_eq!(grid["count"], 10 * 10);
}

#[test]
fn witness_certificate_round_trips() {
    let out = run(&["witness", "--x", "liouville:fact", "--K", "4", "--N", "10000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out);
    let cert: CertificateJson = serde_json::from_value(v["certificate"].clone()).unwrap();
    assert_eq!(cert.k, 4);
    assert_eq!(cert.n[..3], ["2", "4", "64"]);
    assert_eq!(serde_json::to_value(&cert).unwrap(), v["certificate"]);
    assert_eq!(v["verification"]["verdict"], "converging");
    let rational = json(&run(&["witness", "--x", "rat:1/3", "--K", "3", "--N", "20"]));
    assert_eq!(rational["certificate"]["y"]["mid"][0], "0/1");
    assert_eq!(rational["verification"]["exact"], true);
}

#[test]
fn cf_and_psi() {
    let v = json(&run(&["cf", "--x", "rat:10/7"]));
    assert_eq!(v["terms"], serde_json::json!(["1", "2", "3"]));
    let v = json(&run(&["psi", "--psi", "pow:1,1", "--N", "20", "--x", "rat:1/3", "--y", "rat:2/3", "--d", "1", "--discretize"]));
    assert_eq!(v["membership"], serde_json::json!([1, 2, 4, 7, 10, 13, 16, 19]));
    assert_eq!(v["reciprocal"][4], "5");
    assert_eq!(v["divergence"]["verdict"], "diverging");
}
