use std::process::{Command, Output};

use aperiodic_spectra::tiling::{fixtures, rule_to_value};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aperiodic-spectra"))
        .args(args)
        .env_remove("APERIODIC_SPECTRA_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn validate_fixtures() {
    for name in fixtures::NAMES {
        let out = run(&["validate", "--fixture", name]);
        assert_eq!(out.status.code(), Some(0), "{name}: {}", stderr(&out));
        let doc = json(&out);
        assert_eq!(doc["schema_version"], 1);
        assert_eq!(doc["command"], "validate");
        assert_eq!(doc["report"]["valid"], true);
    }
}

#[test]
fn broken_rule_exits_with_two_and_names_the_parent() {
    let mut doc = rule_to_value(&fixtures::np13());
    doc["children"][0].as_array_mut().unwrap().pop();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.json");
    std::fs::write(&path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
    let out = run(&["validate", "--rule", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr(&out);
    assert!(err.contains("[parent a]"), "{err}");
    assert!(stdout(&out).is_empty());
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(&["validate"]).status.code(), Some(1));
    assert_eq!(run(&["validate", "--fixture", "nope"]).status.code(), Some(1));
    assert_eq!(run(&["validate", "--fixture", "np13", "--format", "csv"]).status.code(), Some(1));
    assert_eq!(run(&["cocycle-sweep", "--fixture", "np13", "--power", "2", "--omega-grid", "0:1:0.3"]).status.code(), Some(1));
}

#[test]
fn classify_reports_verdicts() {
    let out = run(&["classify", "--fixture", "np13", "--assert-aperiodic", "--assert-injective"]);
    let doc = json(&out);
    let c = &doc["report"]["classification"];
    assert_eq!(c["algebraic"]["verdict"], "STRONGLY_TOTALLY_NON_PISOT");
    assert_eq!(c["verdict"], "WEAKLY_MIXING_BY_THM");
    let fib = json(&run(&["classify", "--fixture", "fib", "--assert-aperiodic", "--assert-injective"]));
    assert_eq!(fib["report"]["classification"]["algebraic"]["verdict"], "PISOT_FAMILY");
    assert_eq!(fib["report"]["classification"]["verdict"], "INCONCLUSIVE");
    let bare = json(&run(&["classify", "--fixture", "npprod"]));
    assert_eq!(bare["report"]["classification"]["verdict"], "INCONCLUSIVE");
}

#[test]
fn supertile_lists_every_tile() {
    let out = run(&["supertile", "--fixture", "fib", "--type", "a", "--n", "4"]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "index,type,name,x,y");
    // #ζ⁴(a) is the Fibonacci number 8.
    assert_eq!(lines.len(), 1 + 8);
}

#[test]
fn cocycle_sweep_rows_and_empty_grid() {
    let out = run(&["cocycle-sweep", "--fixture", "np13", "--power", "2", "--omega-grid", "0:3:0.01", "--n", "6"]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "omega_x,omega_y,n,pi_max,pi_normalized,riesz,ratio");
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|c| c.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 301);
    assert!(rows.iter().all(|r| r[6] <= 1.0 + 1e-12));
    assert!(stderr(&out).contains("max_ratio"));

    let empty = run(&["cocycle-sweep", "--fixture", "np13", "--power", "2", "--omega-grid", "1:0:0.1"]);
    assert_eq!(empty.status.code(), Some(0));
    assert_eq!(stdout(&empty), "omega_x,omega_y,n,pi_max,pi_normalized,riesz,ratio\n");
}

#[test]
fn json_tables_carry_summary() {
    let out = run(&["cocycle-sweep", "--fixture", "np13", "--power", "2", "--omega", "0.37", "--format", "json"]);
    let doc = json(&out);
    assert_eq!(doc["command"], "cocycle-sweep");
    assert_eq!(doc["rows"].as_array().unwrap().len(), 1);
    assert!(doc["summary"]["mass"].as_f64().unwrap() > 0.0);
}

#[test]
fn epsilon_modes() {
    let short = run(&["epsilon", "--fixture", "np13", "--omega", "1", "--n", "5"]);
    assert_eq!(short.status.code(), Some(0), "{}", stderr(&short));
    assert_eq!(stdout(&short).lines().count(), 1 + 6);
    assert!(stderr(&short).contains("eigenvalue_criterion: null"));

    let grid = run(&["epsilon", "--fixture", "fib", "--omega-grid", "0:3:0.0001"]);
    let text = stdout(&grid);
    let found: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(found.len(), 3, "{text}");
    for (w, want) in found.iter().zip([1.0, 2.0, 3.0]) {
        assert!((w - want).abs() < 1e-9);
    }
    let none = run(&["epsilon", "--fixture", "np13", "--omega-grid", "0:3:0.0001"]);
    assert_eq!(stdout(&none).lines().count(), 1);
}

#[test]
fn output_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    let args = ["supertile", "--fixture", "npprod", "--n", "2"];
    let direct = run(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let redirected = run(&with_out);
    assert_eq!(redirected.status.code(), Some(0));
    assert!(redirected.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), direct.stdout);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = ["spectral-decay", "--fixture", "np13", "--power", "2", "--r", "2^-3..2^-5", "--samples", "32"];
    let one = run(&[&args[..], &["--threads", "1"]].concat());
    let many = run(&[&args[..], &["--threads", "8"]].concat());
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    assert_eq!(one.stdout, many.stdout);
    assert_eq!(one.stderr, many.stderr);
}
