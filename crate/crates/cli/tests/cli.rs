use std::process::{Command, Output};

use smm_testkit::{fixture, read_fixture};

fn smm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smm"))
        .args(args)
        .current_dir(smm_testkit::workspace_root())
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

const MODEL: &str = "fixtures/reference-smm.smmdl";
const ALPHA: &str = "fixtures/team-alpha.smma";

#[test]
fn evaluate_text_matches_golden() {
    let o = smm(&["evaluate", "--model", MODEL, "--assessment", ALPHA, "--format", "text"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), read_fixture("golden/team-alpha.report.txt"));
    // warnings are located and kept off stdout
    assert!(stderr(&o).contains("fixtures/reference-smm.smmdl:11:7: warning[UNSCORED_PARAM]"));
}

#[test]
fn evaluate_json_matches_golden() {
    let o = smm(&["evaluate", "--model", MODEL, "--assessment", ALPHA, "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), read_fixture("golden/team-alpha.evaluation.json"));
}

#[test]
fn evaluate_method_projection() {
    let o = smm(&["evaluate", "--model", MODEL, "--assessment", ALPHA, "--method", "compensatory", "--format", "json"]);
    let out = stdout(&o);
    assert!(out.contains("\"compensatory_score\""));
    assert!(!out.contains("two_tier_level"));
    let o = smm(&["evaluate", "--model", MODEL, "--assessment", ALPHA, "--method", "two-tier"]);
    assert!(!stdout(&o).contains("Compensatory:"));
}

#[test]
fn validate_reports_located_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.smmdl");
    std::fs::write(&bad, read_fixture("reference-smm.smmdl").replace("uses TEC.CI weight 2", "uses TEC.CX weight 2")).unwrap();
    let o = smm(&["validate", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(o.stdout.is_empty());
    let err = stderr(&o);
    assert!(err.contains("bad.smmdl:43:10: error[UNKNOWN_PARAM]"), "{err}");
}

#[test]
fn validate_clean_inputs() {
    let o = smm(&["validate", MODEL, ALPHA]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("ok (19 parameters, 5 KPAs)"));
}

#[test]
fn syntax_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.smma");
    std::fs::write(&bad, "assessment \"x\" model \"reference-smm\" version 1 team \"t\" date 2024-01-01\nscore REQ.TRACE 3\n").unwrap();
    let o = smm(&["evaluate", "--model", MODEL, "--assessment", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains(":2:17: error[SCORE_RANGE]"), "{}", stderr(&o));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(smm(&["evaluate", "--bogus"]).status.code(), Some(2));
    assert_eq!(smm(&["plan", "--model", MODEL, "--assessment", ALPHA, "--kpa", "RE", "--target", "staged"]).status.code(), Some(2));
    assert_eq!(smm(&[]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_one() {
    let o = smm(&["validate", "fixtures/none.smmdl"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error: cannot read fixtures/none.smmdl"));
}

#[test]
fn plan_two_step_fixture() {
    let o = smm(&[
        "plan", "--model", "fixtures/two-params.smmdl", "--assessment", "fixtures/two-params-zero.smma",
        "--kpa", "K", "--target", "intermediate",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "Improvement plan for K (compensatory): Initial -> Intermediate\n   1. A  0 -> 1  cost 1\n   2. A  1 -> 2  cost 1\ntotal cost 2 (minimal)\n"
    );
}

#[test]
fn plan_json_and_case_insensitive_target() {
    let o = smm(&[
        "plan", "--model", "fixtures/two-params.smmdl", "--assessment", "fixtures/two-params-zero.smma",
        "--kpa", "K", "--target", "INTERMEDIATE", "--format", "json",
    ]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["steps"].as_array().unwrap().len(), 2);
    assert_eq!(v["total_cost"], 2.0);
}

#[test]
fn plan_when_already_there() {
    let dir = tempfile::tempdir().unwrap();
    let full = dir.path().join("full.smma");
    std::fs::write(&full, read_fixture("two-params-zero.smma").replace(" 0\n", " 2\n")).unwrap();
    let o = smm(&[
        "plan", "--model", "fixtures/two-params.smmdl", "--assessment", full.to_str().unwrap(),
        "--kpa", "K", "--target", "optimizing",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).ends_with("no steps needed\n"));
}

#[test]
fn plan_unknown_kpa() {
    let o = smm(&["plan", "--model", MODEL, "--assessment", ALPHA, "--kpa", "XX", "--target", "advanced"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("unknown KPA XX"));
}

#[test]
fn diff_matches_golden() {
    let o = smm(&["diff", "--model", MODEL, "--before", ALPHA, "--after", "fixtures/team-alpha-autumn.smma"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), read_fixture("golden/team-alpha.diff.txt"));
}

#[test]
fn serve_requires_a_store() {
    let o = Command::new(env!("CARGO_BIN_EXE_smm"))
        .args(["serve"])
        .env_remove("SMM_STORE_ROOT")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(fixture("reference-smm.smmdl").exists());
}
