//! End-to-end checks of the command-line surface: golden output, byte
//! determinism, exit codes, and JSON round-trips.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fricke"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "command {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf8")
}

#[test]
fn model_matches_golden_file() {
    let golden = include_str!("data/model_n2_n1.txt");
    let out = stdout(&["model", "--N", "2", "--n", "1"]);
    assert_eq!(out, golden, "model output deviates from the golden file");
}

#[test]
fn model_output_is_deterministic() {
    let a = stdout(&["model", "--N", "2", "--n", "1"]);
    let b = stdout(&["model", "--N", "2", "--n", "1"]);
    assert_eq!(a, b);
}

#[test]
fn qexp_j_golden_string() {
    let out = stdout(&["qexp", "--family", "j", "--terms", "3"]);
    assert_eq!(out, "q^-1 + 744 + 196884*q + O(q^2)\n");
}

#[test]
fn qexp_siegel_leading_order() {
    let out = stdout(&[
        "qexp", "--family", "siegel", "--N", "2", "--v", "1/2,0", "--n", "1", "--terms", "4",
    ]);
    assert!(out.starts_with("q^-1 - 48*q^(-1/2)"), "got {out}");
}

#[test]
fn qexp_missing_index_is_usage_error() {
    let out = run(&["qexp", "--family", "siegel", "--N", "2"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn qexp_json_round_trips() {
    let text = stdout(&[
        "qexp", "--family", "fricke", "--N", "3", "--v", "1/3,0", "--terms", "5", "--json",
    ]);
    let value: serde_json::Value = serde_json::from_str(&text).expect("valid JSON");
    let series: fricke::qseries::SeriesJson =
        serde_json::from_value(value["series"].clone()).expect("series schema");
    let parsed = fricke::qseries::FracQSeries::from_json(&series).expect("parses back");
    assert_eq!(parsed.to_json(), series);
}

#[test]
fn qn_set_outputs() {
    assert_eq!(stdout(&["qn-set", "--N", "15"]), "4\n");
    assert_eq!(stdout(&["qn-set", "--N", "7"]), "");
    let json = stdout(&["qn-set", "--N", "15", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["qn_set"], serde_json::json!([4]));
    // even N is a usage error
    assert_eq!(run(&["qn-set", "--N", "6"]).status.code(), Some(2));
}

#[test]
fn family_check_diff_total_reports_witness() {
    let out = stdout(&[
        "family-check", "--family", "diff:2", "--N", "5", "--total", "--terms", "25",
    ]);
    assert!(out.starts_with("NotTotallyPrimitive"), "got {out}");
    assert!(out.contains("-1 (root of unity order Some(2), symbolic true)"));
}

#[test]
fn family_check_expect_controls_exit_code() {
    // diff family is not totally primitive: --expect total must exit 1
    let out = run(&[
        "family-check", "--family", "diff:2", "--N", "5", "--total", "--terms", "25",
        "--expect", "total",
    ]);
    assert_eq!(out.status.code(), Some(1));
    // but it is primitive
    let out = run(&[
        "family-check", "--family", "diff:2", "--N", "5", "--terms", "25", "--expect",
        "primitive",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn family_check_json_round_trips() {
    let text = stdout(&[
        "family-check", "--family", "siegel", "--N", "3", "--terms", "20", "--json",
    ]);
    let report: fricke::primitivity::PrimitivityReportJson =
        serde_json::from_str(&text).expect("schema");
    assert_eq!(report.verdict, "Primitive");
    let text2 = serde_json::to_string_pretty(&report).unwrap();
    let report2: fricke::primitivity::PrimitivityReportJson =
        serde_json::from_str(&text2).unwrap();
    assert_eq!(report, report2);
}

#[test]
fn orbit_listing() {
    let out = stdout(&["orbit", "--N", "2", "--n", "1"]);
    assert!(out.starts_with("6 cosets"), "got {out}");
    let json = stdout(&["orbit", "--N", "3", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert_eq!(v["cosets"], serde_json::json!(12));
}

#[test]
fn stabilizer_verdicts() {
    let out = stdout(&["stabilizer", "--family", "fricke", "--N", "2", "--terms", "25"]);
    assert!(out.starts_with("TrivialStabilizer: 5 non-identity cosets"), "got {out}");
    let out = stdout(&["stabilizer", "--family", "siegel", "--N", "2"]);
    assert!(out.starts_with("TrivialStabilizer"), "got {out}");
}

#[test]
fn cm_report_text_and_json() {
    let text = stdout(&[
        "cm", "--dk", "-7", "--N", "3", "--family", "siegel", "--n", "1", "--terms", "25",
    ]);
    assert!(text.contains("W/{±1} classes: 4"), "got {text}");
    assert!(text.contains("distinct at 1.0e-6: true"));
    let json = stdout(&[
        "cm", "--dk", "-7", "--N", "3", "--family", "siegel", "--n", "1", "--terms", "25",
        "--json",
    ]);
    let report: fricke::cm::CMReportJson = serde_json::from_str(&json).expect("schema");
    assert_eq!(report.conjugates.len(), 4);
    assert!(report.distinct);
    // deterministic output
    let json2 = stdout(&[
        "cm", "--dk", "-7", "--N", "3", "--family", "siegel", "--n", "1", "--terms", "25",
        "--json",
    ]);
    assert_eq!(json, json2);
}

#[test]
fn cm_usage_errors() {
    // non-fundamental discriminant
    assert_eq!(run(&["cm", "--dk", "-5", "--N", "3"]).status.code(), Some(2));
    // excluded fields
    assert_eq!(run(&["cm", "--dk", "-4", "--N", "3"]).status.code(), Some(2));
    // precision floor
    assert_eq!(
        run(&["cm", "--dk", "-7", "--N", "3", "--prec-bits", "32"]).status.code(),
        Some(2)
    );
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("j.txt");
    let out = run(&[
        "qexp", "--family", "j", "--terms", "3", "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    assert_eq!(
        std::fs::read_to_string(&path).unwrap(),
        "q^-1 + 744 + 196884*q + O(q^2)\n"
    );
}

#[test]
fn header_goes_to_stderr() {
    let out = run(&["qexp", "--family", "j", "--terms", "3"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.starts_with("# fricke qexp"), "got {err}");
    assert!(err.contains("defaults="));
}
