//! Brute-force reference implementation of the evaluation formulas and the
//! cheapest-plan search.
//!
//! Completeness is computed as achieved weighted score over the maximum
//! attainable weighted score (every parameter at level 2), level tables are
//! encoded as explicit row lists, and plans are found by enumerating every
//! combination of final parameter levels.

use std::collections::BTreeMap;

use smm_core::{MaturityLevel, MaturityModel, ParameterCategory, Tier};

/// Parameter levels as plain integers; absent means 0.
pub type Levels = BTreeMap<String, u8>;

fn level_of(levels: &Levels, id: &str) -> u8 {
    levels.get(id).copied().unwrap_or(0)
}

/// 100 * achieved / attainable for `(weight, level)` pairs.
pub fn completeness(pairs: &[(f64, u8)]) -> f64 {
    let mut achieved = 0.0;
    for &(w, s) in pairs {
        achieved += w * s as f64;
    }
    let mut attainable = 0.0;
    for &(w, _) in pairs {
        attainable += w * 2.0;
    }
    achieved * 100.0 / attainable
}

/// `(lower bound inclusive, level)` rows; the last row also includes 100.
const COMPENSATORY_ROWS: [(f64, MaturityLevel); 4] = [
    (80.0, MaturityLevel::Optimizing),
    (60.0, MaturityLevel::Advanced),
    (30.0, MaturityLevel::Intermediate),
    (0.0, MaturityLevel::Initial),
];

pub fn compensatory_level(score: f64) -> MaturityLevel {
    assert!((0.0..=100.0).contains(&score), "score {score} out of range");
    COMPENSATORY_ROWS
        .iter()
        .find(|(lo, _)| score >= *lo)
        .map(|(_, l)| *l)
        .unwrap()
}

/// Rows `(basic range, advanced range, level)` with half-open ranges
/// `[lo, hi)`, where `hi = 101` stands for "up to and including 100". The
/// first four rows are the published table; the fifth fills the cell the
/// table leaves open (basic at least 80, advanced below 20).
const TWO_TIER_ROWS: [((f64, f64), (f64, f64), MaturityLevel); 5] = [
    ((0.0, 50.0), (0.0, 101.0), MaturityLevel::Initial),
    ((50.0, 80.0), (0.0, 20.0), MaturityLevel::Intermediate),
    ((80.0, 101.0), (20.0, 50.0), MaturityLevel::Advanced),
    ((80.0, 101.0), (50.0, 101.0), MaturityLevel::Optimizing),
    ((80.0, 101.0), (0.0, 20.0), MaturityLevel::Intermediate),
];

pub fn two_tier_level(basic: f64, advanced: f64) -> MaturityLevel {
    assert!((0.0..=100.0).contains(&basic) && (0.0..=100.0).contains(&advanced));
    let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v < hi;
    if let Some((_, _, level)) = TWO_TIER_ROWS
        .iter()
        .find(|(b, a, _)| inside(basic, *b) && inside(advanced, *a))
    {
        return *level;
    }
    // basic in [50, 80) with advanced >= 20: the table lists the
    // intermediate row only for advanced below 20; basic alone caps the
    // level at Intermediate here.
    assert!((50.0..80.0).contains(&basic));
    MaturityLevel::Intermediate
}

#[derive(Debug, Clone, PartialEq)]
pub struct OraclePa {
    pub kpa_id: String,
    pub sg: Vec<f64>,
    pub compensatory: f64,
    pub compensatory_level: MaturityLevel,
    pub two_tier: Option<(f64, f64, MaturityLevel)>,
    pub categories: BTreeMap<ParameterCategory, f64>,
}

fn average(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        None
    } else {
        Some(xs.iter().sum::<f64>() / xs.len() as f64)
    }
}

pub fn evaluate(model: &MaturityModel, levels: &Levels) -> Vec<OraclePa> {
    let category_of: BTreeMap<&str, ParameterCategory> = model
        .parameters
        .iter()
        .map(|p| (p.id.as_str(), p.category))
        .collect();
    let mut out = Vec::new();
    for kpa in &model.kpas {
        let mut sg = Vec::new();
        let mut basic = Vec::new();
        let mut advanced = Vec::new();
        let mut per_category: BTreeMap<ParameterCategory, Vec<(f64, u8)>> = BTreeMap::new();
        for goal in &kpa.goals {
            let pairs: Vec<(f64, u8)> = goal
                .bindings
                .iter()
                .map(|b| (b.weight, level_of(levels, &b.parameter_id)))
                .collect();
            for (b, pair) in goal.bindings.iter().zip(&pairs) {
                per_category
                    .entry(category_of[b.parameter_id.as_str()])
                    .or_default()
                    .push(*pair);
            }
            let c = completeness(&pairs);
            sg.push(c);
            match goal.tier {
                Tier::Basic => basic.push(c),
                Tier::Advanced => advanced.push(c),
            }
        }
        let compensatory = average(&sg).expect("KPA has goals");
        let two_tier = match (average(&basic), average(&advanced)) {
            (Some(b), Some(a)) => Some((b, a, two_tier_level(b, a))),
            _ => None,
        };
        out.push(OraclePa {
            kpa_id: kpa.id.clone(),
            sg,
            compensatory,
            compensatory_level: compensatory_level(compensatory),
            two_tier,
            categories: per_category
                .into_iter()
                .map(|(c, pairs)| (c, completeness(&pairs)))
                .collect(),
        });
    }
    out
}

/// Cheapest total cost of raising parameters bound by `kpa_id` so that its
/// level under the chosen method reaches `target`, found by enumerating every
/// combination of final levels. `None` if unreachable.
pub fn min_plan_cost(
    model: &MaturityModel,
    levels: &Levels,
    kpa_id: &str,
    two_tier: bool,
    target: MaturityLevel,
) -> Option<f64> {
    let kpa = model.kpas.iter().find(|k| k.id == kpa_id)?;
    let mut params: Vec<&str> = Vec::new();
    for b in kpa.goals.iter().flat_map(|g| &g.bindings) {
        if !params.contains(&b.parameter_id.as_str()) {
            params.push(&b.parameter_id);
        }
    }
    let cost_of: BTreeMap<&str, f64> = model
        .parameters
        .iter()
        .map(|p| (p.id.as_str(), p.step_cost))
        .collect();
    let single = MaturityModel {
        kpas: vec![kpa.clone()],
        ..model.clone()
    };

    let start: Vec<u8> = params.iter().map(|p| level_of(levels, p)).collect();
    let mut best: Option<f64> = None;
    let mut current = start.clone();
    loop {
        let mut trial = levels.clone();
        let mut cost = 0.0;
        for (i, p) in params.iter().enumerate() {
            trial.insert((*p).to_owned(), current[i]);
            cost += (current[i] - start[i]) as f64 * cost_of[p];
        }
        let pa = &evaluate(&single, &trial)[0];
        let level = if two_tier {
            pa.two_tier.map(|t| t.2)
        } else {
            Some(pa.compensatory_level)
        };
        if level.is_some_and(|l| l >= target) && best.is_none_or(|b| cost < b) {
            best = Some(cost);
        }
        // odometer over final levels start[i]..=2
        let mut i = 0;
        loop {
            if i == params.len() {
                return best;
            }
            if current[i] < 2 {
                current[i] += 1;
                break;
            }
            current[i] = start[i];
            i += 1;
        }
    }
}
