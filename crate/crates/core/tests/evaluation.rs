use std::collections::BTreeMap;

use proptest::prelude::*;

use smm_core::scoring::{
    category_breakdown, interpret_compensatory, interpret_two_tier, sg_completeness,
};
use smm_core::{
    evaluate, Assessment, EvaluationResult, MaturityLevel, MaturityModel, ParameterCategory,
    ParameterDef, Score, ScoreLevel, SpecificGoalDef, Tier,
};
use smm_testkit::gen::{self, ModelShape};
use smm_testkit::oracle;

const TOL: f64 = 1e-9;

fn levels(pairs: &[(&str, u8)]) -> BTreeMap<String, ScoreLevel> {
    pairs
        .iter()
        .map(|(id, l)| (id.to_string(), ScoreLevel::from_value(*l).unwrap()))
        .collect()
}

fn goal(bindings: &[(&str, f64)], tier: Tier) -> SpecificGoalDef {
    SpecificGoalDef {
        id: "G".into(),
        name: "g".into(),
        tier,
        bindings: bindings
            .iter()
            .map(|(p, w)| smm_core::ParameterBinding {
                parameter_id: p.to_string(),
                weight: *w,
            })
            .collect(),
    }
}

fn assert_matches_oracle(model: &MaturityModel, assessment: &Assessment, result: &EvaluationResult) {
    let expected = oracle::evaluate(model, &gen::levels_of(model, assessment));
    assert_eq!(result.pa_evaluations.len(), expected.len());
    for (pa, o) in result.pa_evaluations.iter().zip(&expected) {
        assert_eq!(pa.kpa_id, o.kpa_id);
        assert_eq!(pa.sg_scores.len(), o.sg.len());
        for (sg, want) in pa.sg_scores.iter().zip(&o.sg) {
            assert!((sg.completeness - want).abs() < TOL, "{} {} vs {want}", sg.sg_id, sg.completeness);
        }
        assert!((pa.compensatory_score.unwrap() - o.compensatory).abs() < TOL);
        assert_eq!(pa.compensatory_level, Some(o.compensatory_level), "{}", pa.kpa_id);
        match o.two_tier {
            Some((b, a, level)) => {
                assert!((pa.basic_score.unwrap() - b).abs() < TOL);
                assert!((pa.advanced_score.unwrap() - a).abs() < TOL);
                assert_eq!(pa.two_tier_level, Some(level));
            }
            None => {
                assert_eq!(pa.basic_score, None);
                assert_eq!(pa.advanced_score, None);
                assert_eq!(pa.two_tier_level, None);
            }
        }
        assert_eq!(
            pa.category_breakdown.keys().collect::<Vec<_>>(),
            o.categories.keys().collect::<Vec<_>>()
        );
        for (c, v) in &pa.category_breakdown {
            assert!((v - o.categories[c]).abs() < TOL);
        }
    }
}

#[test]
fn completeness_examples() {
    // 100 * (1*2 + 2*1) / (2 * 3)
    let g = goal(&[("A", 1.0), ("B", 2.0)], Tier::Basic);
    let c = sg_completeness(&g, &levels(&[("A", 2), ("B", 1)])).unwrap();
    assert!((c - 66.666_666_666_666_67).abs() < 1e-12);
    assert!((c - oracle::completeness(&[(1.0, 2), (2.0, 1)])).abs() < 1e-12);

    let g = goal(&[("A", 1.0), ("B", 1.0)], Tier::Basic);
    assert_eq!(sg_completeness(&g, &levels(&[("A", 1), ("B", 2)])).unwrap(), 75.0);
    assert_eq!(sg_completeness(&g, &levels(&[])).unwrap(), 0.0);
    assert_eq!(sg_completeness(&g, &levels(&[("A", 2), ("B", 2)])).unwrap(), 100.0);
}

#[test]
fn level_boundaries() {
    use MaturityLevel::*;
    for (score, level) in [
        (0.0, Initial),
        (29.999_999, Initial),
        (30.0, Intermediate),
        (59.999, Intermediate),
        (60.0, Advanced),
        (80.0, Optimizing),
        (100.0, Optimizing),
    ] {
        assert_eq!(interpret_compensatory(score).unwrap(), level, "{score}");
        assert_eq!(oracle::compensatory_level(score), level, "{score}");
    }
    for (b, a, level) in [
        (49.9, 100.0, Initial),
        (50.0, 0.0, Intermediate),
        (79.9, 99.0, Intermediate),
        (85.0, 10.0, Intermediate),
        (80.0, 20.0, Advanced),
        (80.0, 50.0, Optimizing),
        (100.0, 100.0, Optimizing),
    ] {
        assert_eq!(interpret_two_tier(b, a).unwrap(), level, "({b}, {a})");
        assert_eq!(oracle::two_tier_level(b, a), level, "({b}, {a})");
    }
}

#[test]
fn category_breakdown_example() {
    let model = MaturityModel {
        id: "m".into(),
        name: "m".into(),
        version: 1,
        parameters: vec![
            ParameterDef {
                id: "P".into(),
                description: "p".into(),
                category: ParameterCategory::ProcessQuality,
                step_cost: 1.0,
            },
            ParameterDef {
                id: "T".into(),
                description: "t".into(),
                category: ParameterCategory::TeamQuality,
                step_cost: 1.0,
            },
        ],
        kpas: vec![smm_core::KpaDef {
            id: "K".into(),
            name: "k".into(),
            plm_stage: "s".into(),
            goals: vec![goal(&[("P", 1.0), ("T", 1.0)], Tier::Basic)],
        }],
    };
    let got = category_breakdown(&model, &model.kpas[0], &levels(&[("P", 1), ("T", 2)]));
    let want = BTreeMap::from([
        (ParameterCategory::ProcessQuality, 50.0),
        (ParameterCategory::TeamQuality, 100.0),
    ]);
    assert_eq!(got, want);
    let empty = category_breakdown(&model, &model.kpas[0], &levels(&[]));
    assert!(empty.values().all(|v| *v == 0.0));
}

#[test]
fn matches_oracle_on_random_models() {
    let shape = ModelShape::default();
    for seed in 0..1000 {
        let mut rng = gen::rng(seed);
        let model = gen::model(&mut rng, &shape);
        let assessment = gen::assessment(&mut rng, &model, 0.2);
        let result = evaluate(&model, &assessment).unwrap();
        assert_matches_oracle(&model, &assessment, &result);
    }
}

#[test]
fn all_zero_and_all_explicit() {
    let mut rng = gen::rng(7);
    for _ in 0..50 {
        let model = gen::model(&mut rng, &ModelShape::default());
        let mut a = gen::assessment(&mut rng, &model, 0.0);
        for level in [ScoreLevel::NotAvailable, ScoreLevel::Explicit] {
            for s in a.scores.values_mut() {
                s.level = level;
            }
            let r = evaluate(&model, &a).unwrap();
            for pa in &r.pa_evaluations {
                let (score, expected) = match level {
                    ScoreLevel::Explicit => (100.0, MaturityLevel::Optimizing),
                    _ => (0.0, MaturityLevel::Initial),
                };
                assert_eq!(pa.compensatory_score, Some(score));
                assert_eq!(pa.compensatory_level, Some(expected));
                if pa.two_tier_level.is_some() {
                    assert_eq!(pa.two_tier_level, Some(expected));
                }
            }
        }
    }
}

#[test]
fn result_has_no_cross_kpa_score() {
    let mut rng = gen::rng(3);
    let model = gen::model(&mut rng, &ModelShape::default());
    let a = gen::assessment(&mut rng, &model, 0.0);
    let json: serde_json::Value = serde_json::to_value(evaluate(&model, &a).unwrap()).unwrap();
    let keys: Vec<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        ["assessment_id", "date", "diagnostics", "method", "model_id", "model_version", "pa_evaluations", "team"]
    );
}

fn model_and_assessment() -> impl Strategy<Value = (MaturityModel, Assessment)> {
    any::<u64>().prop_map(|seed| {
        let mut rng = gen::rng(seed);
        let model = gen::model(&mut rng, &ModelShape::default());
        let assessment = gen::assessment(&mut rng, &model, 0.3);
        (model, assessment)
    })
}

fn raised(a: &Assessment, id: &str) -> Option<Assessment> {
    let next = a.level(id).next()?;
    let mut b = a.clone();
    b.scores.insert(id.to_owned(), Score::new(next));
    Some(b)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn scores_are_bounded((model, a) in model_and_assessment()) {
        let r = evaluate(&model, &a).unwrap();
        for pa in &r.pa_evaluations {
            let mut all: Vec<f64> = pa.sg_scores.iter().map(|s| s.completeness).collect();
            all.extend(pa.compensatory_score);
            all.extend(pa.basic_score);
            all.extend(pa.advanced_score);
            all.extend(pa.category_breakdown.values());
            prop_assert!(all.iter().all(|v| (0.0..=100.0).contains(v)));
        }
    }

    #[test]
    fn single_increment_never_lowers_anything((model, a) in model_and_assessment(), pick in any::<prop::sample::Index>()) {
        let p = &model.parameters[pick.index(model.parameters.len())].id;
        if let Some(b) = raised(&a, p) {
            let before = evaluate(&model, &a).unwrap();
            let after = evaluate(&model, &b).unwrap();
            for (x, y) in before.pa_evaluations.iter().zip(&after.pa_evaluations) {
                for (s, t) in x.sg_scores.iter().zip(&y.sg_scores) {
                    prop_assert!(t.completeness >= s.completeness);
                }
                prop_assert!(y.compensatory_score >= x.compensatory_score);
                prop_assert!(y.compensatory_level >= x.compensatory_level);
                prop_assert!(y.basic_score >= x.basic_score);
                prop_assert!(y.advanced_score >= x.advanced_score);
                prop_assert!(y.two_tier_level >= x.two_tier_level);
            }
        }
    }

    #[test]
    fn increment_changes_exactly_the_binding_goals((model, a) in model_and_assessment(), pick in any::<prop::sample::Index>()) {
        let p = &model.parameters[pick.index(model.parameters.len())].id;
        if let Some(b) = raised(&a, p) {
            let before = evaluate(&model, &a).unwrap();
            let after = evaluate(&model, &b).unwrap();
            let goals = model.kpas.iter().flat_map(|k| &k.goals);
            let scores = before.pa_evaluations.iter().zip(&after.pa_evaluations)
                .flat_map(|(x, y)| x.sg_scores.iter().zip(&y.sg_scores));
            for (g, (s, t)) in goals.zip(scores) {
                let binds = g.bindings.iter().any(|bd| &bd.parameter_id == p);
                prop_assert_eq!(binds, t.completeness != s.completeness, "goal {}", g.id);
            }
        }
    }

    #[test]
    fn weight_scaling_leaves_completeness_unchanged(
        (model, a) in model_and_assessment(),
        c in prop::sample::select(vec![0.1, 2.0, 10.0, 0.37, 1e3]),
    ) {
        for g in model.kpas.iter().flat_map(|k| &k.goals) {
            let mut scaled = g.clone();
            for b in &mut scaled.bindings {
                b.weight *= c;
            }
            let x = sg_completeness(g, &a).unwrap();
            let y = sg_completeness(&scaled, &a).unwrap();
            prop_assert!((x - y).abs() < TOL, "{} vs {}", x, y);
        }
    }

    #[test]
    fn unscored_equals_explicit_zero((model, a) in model_and_assessment()) {
        let mut filled = a.clone();
        for p in &model.parameters {
            filled.scores.entry(p.id.clone()).or_insert(Score::new(ScoreLevel::NotAvailable));
        }
        let x = evaluate(&model, &a).unwrap();
        let y = evaluate(&model, &filled).unwrap();
        prop_assert_eq!(x.pa_evaluations, y.pa_evaluations);
        prop_assert!(y.diagnostics.iter().all(|d| d.rule_code != "UNSCORED_PARAM"));
    }

    #[test]
    fn evaluation_is_deterministic((model, a) in model_and_assessment()) {
        prop_assert_eq!(evaluate(&model, &a).unwrap(), evaluate(&model, &a).unwrap());
    }
}
