use std::process::{Command, Output};

use serde_json::Value;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_malle-lab")).args(args).output().expect("binary runs")
}

fn scheme(name: &str) -> String {
    format!("{}/../../data/schemes/{name}", env!("CARGO_MANIFEST_DIR"))
}

#[test]
fn exit_codes_separate_failure_from_error() {
    assert_eq!(lab(&["tame-table", "--l", "5"]).status.code(), Some(0));
    assert_eq!(lab(&["verify-lemmas", "--n", "3", "--group", "5", "--rk", "zeroed"]).status.code(), Some(1));
    let missing = lab(&["sieve-exp", "--scheme", "/nonexistent/scheme.json"]);
    assert_eq!(missing.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&missing.stderr).contains("cannot read"));
    assert_eq!(lab(&["tame-table", "--l", "4"]).status.code(), Some(2));
    assert_eq!(lab(&["convolve", "--x", "not-a-number"]).status.code(), Some(2));
    assert_eq!(lab(&["no-such-command"]).status.code(), Some(2));
}

#[test]
fn tame_table_csv_layout() {
    let out = lab(&["tame-table", "--l", "5", "--k", "1"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# malle-lab "));
    assert!(lines[1].starts_with("# config {"));
    let header = lines.iter().position(|l| !l.starts_with('#')).unwrap();
    assert_eq!(lines[header], "class,r,a_cycle_type,a_index,exponent,closed_form,match");
    let exps: Vec<&str> = lines[header + 1..].iter().map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(exps, ["13", "14"]);
}

#[test]
fn json_reports_carry_their_config() {
    let out = lab(&["euler-constant", "--p-max", "1e4"]);
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["tool"], "malle-lab");
    assert_eq!(v["command"], "euler-constant");
    assert_eq!(v["config"]["p_max"], 10_000);
    assert!(v["version"].is_string());
}

#[test]
fn output_file_format_follows_extension() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.json");
    let out = lab(&["tame-table", "--l", "7", "--k", "2", "--out", path.to_str().unwrap()]);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["all_match"], true);
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    let disc = scheme("disc_cubic.json");
    let args = ["sieve-exp", "--scheme", &disc, "--r-vectors", "16,12,6,6", "--shears", "2", "--q", "2,3,5,7,11,30"];
    let one = lab(&[&["--workers", "1"], &args[..]].concat());
    let many = lab(&[&["--workers", "3"], &args[..]].concat());
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, many.stdout);

    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.jsonl");
    lab(&["enumerate-cyclic", "--l", "3", "--x", "1e4", "--out", a.to_str().unwrap()]);
    let pairs = ["count-pairs", "--a-fields", a.to_str().unwrap(), "--x", "1e11", "--steps", "4", "--format", "csv"];
    let one = lab(&[&["--workers", "1"], &pairs[..]].concat());
    let many = lab(&[&["--workers", "4"], &pairs[..]].concat());
    assert!(one.status.success(), "{}", String::from_utf8_lossy(&one.stderr));
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn field_files_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cubic.jsonl");
    assert!(lab(&["enumerate-cubic", "--x", "1e4", "--out", path.to_str().unwrap()]).status.success());
    let out = lab(&["convolve", "--s1", &format!("fields:{}", path.display()), "--x", "1e4", "--form1", "0.1,1,0"]);
    assert!(matches!(out.status.code(), Some(0 | 1)), "{}", String::from_utf8_lossy(&out.stderr));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["result"]["counts"].as_array().unwrap().len() >= 8);
}
