//! Frozen outputs for the shipped fixtures. Run with `SMM_BLESS=1` to
//! rewrite a golden file after an intended change; the oracle checks below
//! still have to pass against the rewritten file.

use std::collections::BTreeMap;
use std::fs;

use smm_core::report::{self, parse_json, render_json, render_text};
use smm_core::{
    evaluate, parse_assessment, parse_model, what_if, Assessment, EvaluationResult,
    MaturityModel, Method, ScoreLevel,
};
use smm_testkit::{fixture, gen, oracle, read_fixture, workspace_root};

fn check_golden(name: &str, actual: &str) {
    let path = fixture(&format!("golden/{name}"));
    if std::env::var_os("SMM_BLESS").is_some() {
        fs::write(&path, actual).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "golden file {name} differs");
}

fn fixtures() -> (MaturityModel, Assessment) {
    (
        parse_model(&read_fixture("reference-smm.smmdl")).unwrap(),
        parse_assessment(&read_fixture("team-alpha.smma")).unwrap(),
    )
}

/// Compares a frozen result with the oracle, reading the levels straight
/// from the assessment rather than through the scoring code.
fn agrees_with_oracle(model: &MaturityModel, levels: &oracle::Levels, frozen: &EvaluationResult) {
    let expected = oracle::evaluate(model, levels);
    for (pa, o) in frozen.pa_evaluations.iter().zip(&expected) {
        for (sg, want) in pa.sg_scores.iter().zip(&o.sg) {
            assert!((sg.completeness - want).abs() < 1e-9);
        }
        assert!((pa.compensatory_score.unwrap() - o.compensatory).abs() < 1e-9);
        assert_eq!(pa.compensatory_level.unwrap(), o.compensatory_level);
        let (b, a, l) = o.two_tier.unwrap();
        assert!((pa.basic_score.unwrap() - b).abs() < 1e-9);
        assert!((pa.advanced_score.unwrap() - a).abs() < 1e-9);
        assert_eq!(pa.two_tier_level.unwrap(), l);
        for (c, v) in &pa.category_breakdown {
            assert!((v - o.categories[c]).abs() < 1e-9);
        }
    }
}

fn what_if_overrides() -> BTreeMap<String, ScoreLevel> {
    BTreeMap::from([
        ("QA.ACCEPT".to_owned(), ScoreLevel::Explicit),
        ("QA.METRICS".to_owned(), ScoreLevel::Implicit),
        ("TEAM.SKILLS".to_owned(), ScoreLevel::Explicit),
    ])
}

#[test]
fn evaluation_json() {
    let (model, a) = fixtures();
    let text = render_json(&evaluate(&model, &a).unwrap());
    check_golden("team-alpha.evaluation.json", &text);

    let frozen = parse_json(&read_fixture("golden/team-alpha.evaluation.json")).unwrap();
    agrees_with_oracle(&model, &gen::levels_of(&model, &a), &frozen);
    let codes: Vec<&str> = frozen.diagnostics.iter().map(|d| d.rule_code.as_str()).collect();
    assert_eq!(codes, ["UNSCORED_PARAM"; 3]);
}

#[test]
fn evaluation_text() {
    let (model, a) = fixtures();
    check_golden("team-alpha.report.txt", &render_text(&evaluate(&model, &a).unwrap()));
}

#[test]
fn what_if_json() {
    let (model, a) = fixtures();
    let overrides = what_if_overrides();
    check_golden(
        "team-alpha.what-if.json",
        &render_json(&what_if(&model, &a, &overrides).unwrap()),
    );

    let frozen = parse_json(&read_fixture("golden/team-alpha.what-if.json")).unwrap();
    let mut levels = gen::levels_of(&model, &a);
    for (id, l) in &overrides {
        levels.insert(id.clone(), l.value());
    }
    agrees_with_oracle(&model, &levels, &frozen);
}

#[test]
fn diff_text() {
    let (model, a) = fixtures();
    let b = parse_assessment(&read_fixture("team-alpha-autumn.smma")).unwrap();
    let c = report::diff(&evaluate(&model, &a).unwrap(), &evaluate(&model, &b).unwrap()).unwrap();
    check_golden("team-alpha.diff.txt", &report::render_diff_text(&c));
}

#[test]
fn json_round_trip_keeps_scores() {
    let (model, a) = fixtures();
    let r = evaluate(&model, &a).unwrap();
    assert_eq!(parse_json(&render_json(&r)).unwrap(), r);
}

fn validator() -> jsonschema::Validator {
    let schema: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(workspace_root().join("docs/report-schema.json")).unwrap(),
    )
    .unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn assert_valid(v: &jsonschema::Validator, text: &str) {
    let doc: serde_json::Value = serde_json::from_str(text).unwrap();
    let errors: Vec<String> = v.iter_errors(&doc).map(|e| format!("{e} at {}", e.instance_path())).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

#[test]
fn reports_match_the_schema() {
    let v = validator();
    let (model, a) = fixtures();
    for method in [Method::Both, Method::Compensatory, Method::TwoTier] {
        assert_valid(&v, &render_json(&evaluate(&model, &a).unwrap().for_method(method)));
    }
    let mut rng = gen::rng(11);
    for _ in 0..100 {
        let m = gen::model(&mut rng, &gen::ModelShape { two_tier_prob: 0.5, ..Default::default() });
        let a = gen::assessment(&mut rng, &m, 0.4);
        assert_valid(&v, &render_json(&evaluate(&m, &a).unwrap()));
    }
}

#[test]
fn schema_rejects_a_null_two_tier_field() {
    let v = validator();
    let (model, a) = fixtures();
    let mut doc: serde_json::Value = serde_json::from_str(&render_json(&evaluate(&model, &a).unwrap())).unwrap();
    doc["pa_evaluations"][0]["basic_score"] = serde_json::Value::Null;
    assert!(!v.is_valid(&doc));
}
