//! Seeded random models and assessments.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use smm_core::{
    Assessment, AssessmentStatus, KpaDef, MaturityModel, ParameterBinding, ParameterCategory,
    ParameterDef, Score, ScoreLevel, SpecificGoalDef, Tier,
};

pub use rand::SeedableRng;
pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub const WEIGHTS: [f64; 4] = [0.5, 1.0, 2.0, 3.0];

#[derive(Debug, Clone, Copy)]
pub struct ModelShape {
    pub max_kpas: usize,
    pub max_goals: usize,
    pub max_params: usize,
    /// Probability that a KPA gets both a basic and an advanced goal.
    pub two_tier_prob: f64,
    /// Exercise escapes and non-ASCII text in display strings.
    pub tricky_text: bool,
}

impl Default for ModelShape {
    fn default() -> Self {
        ModelShape {
            max_kpas: 3,
            max_goals: 4,
            max_params: 6,
            two_tier_prob: 0.8,
            tricky_text: false,
        }
    }
}

fn text(rng: &mut TestRng, base: &str, tricky: bool) -> String {
    if !tricky {
        return base.to_owned();
    }
    let extras = ["", " \"quoted\"", " back\\slash", " Café ✓", " # not a comment", "  "];
    format!("{base}{}", extras.choose(rng).unwrap())
}

/// A valid random model: every pool parameter is bound at least once, and
/// no goal binds the same parameter twice.
pub fn model(rng: &mut TestRng, shape: &ModelShape) -> MaturityModel {
    let n_params = rng.gen_range(1..=shape.max_params);
    let parameters: Vec<ParameterDef> = (0..n_params)
        .map(|i| ParameterDef {
            id: format!("P{i}"),
            description: text(rng, &format!("parameter {i}"), shape.tricky_text),
            category: *ParameterCategory::ALL.choose(rng).unwrap(),
            step_cost: *[0.5, 1.0, 1.0, 2.0, 3.0].choose(rng).unwrap(),
        })
        .collect();

    let n_kpas = rng.gen_range(1..=shape.max_kpas);
    let mut kpas: Vec<KpaDef> = (0..n_kpas)
        .map(|k| {
            let two_tier = shape.max_goals >= 2 && rng.gen_bool(shape.two_tier_prob);
            let min_goals = if two_tier { 2 } else { 1 };
            let n_goals = rng.gen_range(min_goals..=shape.max_goals.max(min_goals));
            let single_tier = if rng.gen_bool(0.5) { Tier::Basic } else { Tier::Advanced };
            let goals = (0..n_goals)
                .map(|g| {
                    let tier = match (two_tier, g) {
                        (true, 0) => Tier::Basic,
                        (true, 1) => Tier::Advanced,
                        (true, _) => {
                            if rng.gen_bool(0.5) {
                                Tier::Basic
                            } else {
                                Tier::Advanced
                            }
                        }
                        (false, _) => single_tier,
                    };
                    let k_bind = rng.gen_range(1..=n_params.min(4));
                    let mut ids: Vec<usize> = (0..n_params).collect();
                    ids.shuffle(rng);
                    SpecificGoalDef {
                        id: format!("K{k}.G{g}"),
                        name: text(rng, &format!("goal {g}"), shape.tricky_text),
                        tier,
                        bindings: ids[..k_bind]
                            .iter()
                            .map(|p| ParameterBinding {
                                parameter_id: format!("P{p}"),
                                weight: *WEIGHTS.choose(rng).unwrap(),
                            })
                            .collect(),
                    }
                })
                .collect();
            let stage = *["Plan", "Build", "Run"].choose(rng).unwrap();
            KpaDef {
                id: format!("K{k}"),
                name: text(rng, &format!("area {k}"), shape.tricky_text),
                plm_stage: text(rng, stage, shape.tricky_text),
                goals,
            }
        })
        .collect();

    for p in &parameters {
        let used = kpas
            .iter()
            .flat_map(|k| &k.goals)
            .any(|g| g.bindings.iter().any(|b| b.parameter_id == p.id));
        if !used {
            let k = rng.gen_range(0..kpas.len());
            let g = rng.gen_range(0..kpas[k].goals.len());
            kpas[k].goals[g].bindings.push(ParameterBinding {
                parameter_id: p.id.clone(),
                weight: *WEIGHTS.choose(rng).unwrap(),
            });
        }
    }

    MaturityModel {
        id: format!("model-{}", rng.gen_range(0..1000)),
        name: text(rng, "Random model", shape.tricky_text),
        version: rng.gen_range(1..5),
        parameters,
        kpas,
    }
}

/// A random assessment of `model`; each parameter is left unscored with
/// probability `omit_prob`.
pub fn assessment(rng: &mut TestRng, model: &MaturityModel, omit_prob: f64) -> Assessment {
    let mut scores = BTreeMap::new();
    for p in &model.parameters {
        if rng.gen_bool(omit_prob) {
            continue;
        }
        let level = ScoreLevel::from_value(rng.gen_range(0..=2)).unwrap();
        let score = if rng.gen_bool(0.3) {
            Score::with_note(level, "see \"wiki\"")
        } else {
            Score::new(level)
        };
        scores.insert(p.id.clone(), score);
    }
    Assessment {
        id: format!("a-{}", rng.gen_range(0..1000)),
        model_id: model.id.clone(),
        model_version: model.version,
        date: NaiveDate::from_ymd_opt(2019, 1, 1).unwrap() + chrono::Days::new(rng.gen_range(0..700)),
        team: "Team Ω".to_owned(),
        status: *[AssessmentStatus::Draft, AssessmentStatus::Reviewed, AssessmentStatus::Final]
            .choose(rng)
            .unwrap(),
        scores,
    }
}

/// Levels of every pool parameter as plain integers (unscored = 0).
pub fn levels_of(model: &MaturityModel, assessment: &Assessment) -> crate::oracle::Levels {
    model
        .parameters
        .iter()
        .map(|p| (p.id.clone(), assessment.level(&p.id).value()))
        .collect()
}
