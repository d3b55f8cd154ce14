//! Minimum-cost improvement plans and what-if evaluation.
//!
//! A plan is a set of single-level parameter increments (0→1, 1→2) that lifts
//! one KPA to a target maturity level under a chosen method. A shared
//! parameter is incremented once and advances every goal that binds it.
//!
//! When the KPA offers at most [`DEFAULT_EXHAUSTIVE_THRESHOLD`] increments in
//! total, a branch-and-bound search returns a provably cheapest plan.
//! Larger instances use a greedy heuristic that repeatedly takes the
//! increment with the best gain per unit cost.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostic::{codes, has_errors};
use crate::model::{
    validate_assessment, validate_model, Assessment, KpaDef, MaturityModel, Score, ScoreLevel,
    Tier,
};
use crate::scoring::{
    evaluate, interpret_compensatory, interpret_two_tier, EvaluationError, EvaluationResult,
    MaturityLevel,
};

/// Largest total number of available increments searched exhaustively.
pub const DEFAULT_EXHAUSTIVE_THRESHOLD: usize = 16;

/// How often the search checks its deadline, in visited nodes.
const DEADLINE_CHECK_INTERVAL: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PlanMethod {
    #[serde(rename = "compensatory")]
    Compensatory,
    #[serde(rename = "two-tier")]
    TwoTier,
}

impl PlanMethod {
    pub fn keyword(self) -> &'static str {
        match self {
            PlanMethod::Compensatory => "compensatory",
            PlanMethod::TwoTier => "two-tier",
        }
    }
}

impl fmt::Display for PlanMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

impl FromStr for PlanMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "compensatory" => Ok(PlanMethod::Compensatory),
            "two-tier" | "two_tier" | "twotier" => Ok(PlanMethod::TwoTier),
            _ => Err(format!(
                "unknown method `{s}`; expected compensatory or two-tier"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlanOptions {
    pub exhaustive_threshold: usize,
    /// Past this instant the search stops and returns its best plan so far
    /// with `exact = false`.
    pub deadline: Option<Instant>,
}

impl Default for PlanOptions {
    fn default() -> Self {
        PlanOptions {
            exhaustive_threshold: DEFAULT_EXHAUSTIVE_THRESHOLD,
            deadline: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementStep {
    pub parameter_id: String,
    pub from_level: ScoreLevel,
    pub to_level: ScoreLevel,
    pub cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImprovementPlan {
    pub kpa_id: String,
    pub method: PlanMethod,
    pub target: MaturityLevel,
    pub current_level: MaturityLevel,
    pub steps: Vec<ImprovementStep>,
    pub total_cost: f64,
    pub achieved: bool,
    /// True when the plan is provably cheapest.
    pub exact: bool,
    /// Other KPAs binding a parameter the plan raises.
    pub also_affects: Vec<String>,
}

impl ImprovementPlan {
    /// Final level of every parameter the plan touches, usable as what-if
    /// overrides.
    pub fn overrides(&self) -> BTreeMap<String, ScoreLevel> {
        self.steps
            .iter()
            .map(|s| (s.parameter_id.clone(), s.to_level))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PlanError {
    #[error("unknown KPA {0}")]
    UnknownKpa(String),
    #[error("unknown parameter {0}")]
    UnknownParam(String),
    #[error("KPA {0} needs at least one basic and one advanced goal for the two-tier method")]
    TierMissing(String),
    #[error("KPA {kpa} cannot reach {target} even with every parameter explicit")]
    TargetUnreachable { kpa: String, target: MaturityLevel },
    #[error(transparent)]
    Evaluation(#[from] EvaluationError),
}

impl PlanError {
    pub fn code(&self) -> &'static str {
        match self {
            PlanError::UnknownKpa(_) => codes::UNKNOWN_KPA,
            PlanError::UnknownParam(_) => codes::UNKNOWN_PARAM,
            PlanError::TierMissing(_) => codes::TIER_MISSING,
            PlanError::TargetUnreachable { .. } => codes::TARGET_UNREACHABLE,
            PlanError::Evaluation(e) => e.code(),
        }
    }
}

/// Evaluation with `overrides` applied to a copy of the assessment. Notes of
/// overridden scores are kept.
pub fn what_if(
    model: &MaturityModel,
    assessment: &Assessment,
    overrides: &BTreeMap<String, ScoreLevel>,
) -> Result<EvaluationResult, PlanError> {
    if let Some(unknown) = overrides.keys().find(|id| model.parameter(id).is_none()) {
        return Err(PlanError::UnknownParam(unknown.clone()));
    }
    let mut hypothetical = assessment.clone();
    for (id, level) in overrides {
        hypothetical
            .scores
            .entry(id.clone())
            .and_modify(|s| s.level = *level)
            .or_insert_with(|| Score::new(*level));
    }
    Ok(evaluate(model, &hypothetical)?)
}

/// A KPA compiled to indices for fast repeated level evaluation.
struct Kernel {
    method: PlanMethod,
    /// Per goal: tier, total weight, (parameter index, weight) pairs.
    goals: Vec<(Tier, f64, Vec<(usize, f64)>)>,
    n_basic: usize,
    n_advanced: usize,
}

impl Kernel {
    fn new(kpa: &KpaDef, params: &[&str], method: PlanMethod) -> Self {
        let index: BTreeMap<&str, usize> = params.iter().enumerate().map(|(i, p)| (*p, i)).collect();
        let goals: Vec<_> = kpa
            .goals
            .iter()
            .map(|g| {
                let bindings: Vec<_> = g
                    .bindings
                    .iter()
                    .map(|b| (index[b.parameter_id.as_str()], b.weight))
                    .collect();
                let total = g.bindings.iter().fold(0.0, |acc, b| acc + b.weight);
                (g.tier, total, bindings)
            })
            .collect();
        let count = |t| goals.iter().filter(|(tier, ..)| *tier == t).count();
        Kernel {
            method,
            n_basic: count(Tier::Basic),
            n_advanced: count(Tier::Advanced),
            goals,
        }
    }

    /// Compensatory score, or (basic, advanced) pair for two-tier.
    fn scores(&self, levels: &[u8]) -> (f64, f64) {
        let mut all = 0.0;
        let mut basic = 0.0;
        let mut advanced = 0.0;
        for (tier, total, bindings) in &self.goals {
            let achieved = bindings
                .iter()
                .fold(0.0, |acc, (i, w)| acc + w * f64::from(levels[*i]));
            let c = 100.0 * achieved / (2.0 * total);
            all += c;
            match tier {
                Tier::Basic => basic += c,
                Tier::Advanced => advanced += c,
            }
        }
        match self.method {
            PlanMethod::Compensatory => (all / self.goals.len() as f64, 0.0),
            PlanMethod::TwoTier => (
                basic / self.n_basic as f64,
                advanced / self.n_advanced as f64,
            ),
        }
    }

    fn level(&self, levels: &[u8]) -> MaturityLevel {
        let (a, b) = self.scores(levels);
        let level = match self.method {
            PlanMethod::Compensatory => interpret_compensatory(a),
            PlanMethod::TwoTier => interpret_two_tier(a, b),
        };
        level.expect("completeness stays within [0, 100]")
    }

    /// Distance to the target's thresholds; zero exactly when reached.
    fn deficit(&self, levels: &[u8], target: MaturityLevel) -> f64 {
        let (a, b) = self.scores(levels);
        match self.method {
            PlanMethod::Compensatory => {
                let need = match target {
                    MaturityLevel::Initial => 0.0,
                    MaturityLevel::Intermediate => 30.0,
                    MaturityLevel::Advanced => 60.0,
                    MaturityLevel::Optimizing => 80.0,
                };
                (need - a).max(0.0)
            }
            PlanMethod::TwoTier => {
                let (need_basic, need_advanced) = match target {
                    MaturityLevel::Initial => (0.0, 0.0),
                    MaturityLevel::Intermediate => (50.0, 0.0),
                    MaturityLevel::Advanced => (80.0, 20.0),
                    MaturityLevel::Optimizing => (80.0, 50.0),
                };
                (need_basic - a).max(0.0) + (need_advanced - b).max(0.0)
            }
        }
    }
}

struct Search<'a> {
    kernel: &'a Kernel,
    target: MaturityLevel,
    start: &'a [u8],
    costs: &'a [f64],
    deadline: Option<Instant>,
    nodes: u64,
    timed_out: bool,
    best: Option<(f64, Vec<u8>)>,
}

impl Search<'_> {
    fn expired(&mut self) -> bool {
        if !self.timed_out {
            self.nodes += 1;
            if self.nodes % DEADLINE_CHECK_INTERVAL == 0 {
                if let Some(d) = self.deadline {
                    self.timed_out = Instant::now() >= d;
                }
            }
        }
        self.timed_out
    }

    /// Assigns final levels to parameters `i..`; `levels[i..]` hold their
    /// starting values on entry and are restored on exit.
    fn visit(&mut self, i: usize, levels: &mut Vec<u8>, cost: f64) {
        if self.expired() {
            return;
        }
        if self.best.as_ref().is_some_and(|(b, _)| cost >= *b) {
            return;
        }
        if self.kernel.level(levels) >= self.target {
            // any further increment only adds cost
            self.best = Some((cost, levels.clone()));
            return;
        }
        if i == levels.len() {
            return;
        }
        let saved: Vec<u8> = levels[i..].to_vec();
        for l in &mut levels[i..] {
            *l = ScoreLevel::MAX.value();
        }
        let reachable = self.kernel.level(levels) >= self.target;
        levels[i..].copy_from_slice(&saved);
        if !reachable {
            return;
        }

        // highest level first, so among equal-cost plans the first found
        // raises the lexicographically earliest parameters
        let from = self.start[i];
        for to in (from..=ScoreLevel::MAX.value()).rev() {
            levels[i] = to;
            let extra = f64::from(to - from) * self.costs[i];
            self.visit(i + 1, levels, cost + extra);
        }
        levels[i] = from;
    }
}

fn greedy(kernel: &Kernel, target: MaturityLevel, start: &[u8], costs: &[f64]) -> Option<Vec<usize>> {
    let mut levels = start.to_vec();
    let mut order = Vec::new();
    loop {
        let deficit = kernel.deficit(&levels, target);
        if kernel.level(&levels) >= target {
            return Some(order);
        }
        let mut best: Option<(f64, usize)> = None;
        for i in 0..levels.len() {
            if levels[i] >= ScoreLevel::MAX.value() {
                continue;
            }
            levels[i] += 1;
            let gain = deficit - kernel.deficit(&levels, target);
            levels[i] -= 1;
            let ratio = gain / costs[i];
            if ratio > 0.0 && best.is_none_or(|(r, _)| ratio > r) {
                best = Some((ratio, i));
            }
        }
        let (_, i) = best?;
        levels[i] += 1;
        order.push(i);
    }
}

fn steps_between(params: &[&str], costs: &[f64], start: &[u8], end: &[u8]) -> Vec<ImprovementStep> {
    let mut steps = Vec::new();
    for (i, id) in params.iter().enumerate() {
        for from in start[i]..end[i] {
            steps.push(step(id, from, costs[i]));
        }
    }
    steps
}

fn step(id: &str, from: u8, cost: f64) -> ImprovementStep {
    ImprovementStep {
        parameter_id: id.to_owned(),
        from_level: ScoreLevel::from_value(from).expect("from < 2"),
        to_level: ScoreLevel::from_value(from + 1).expect("from < 2"),
        cost,
    }
}

/// Cheapest set of increments lifting `kpa_id` to `target` under `method`.
pub fn plan(
    model: &MaturityModel,
    assessment: &Assessment,
    kpa_id: &str,
    method: PlanMethod,
    target: MaturityLevel,
    options: &PlanOptions,
) -> Result<ImprovementPlan, PlanError> {
    let mut diagnostics = validate_model(model);
    if !has_errors(&diagnostics) {
        diagnostics.extend(validate_assessment(assessment, model));
    }
    if has_errors(&diagnostics) {
        return Err(EvaluationError::Invalid(diagnostics).into());
    }
    let kpa = model
        .kpa(kpa_id)
        .ok_or_else(|| PlanError::UnknownKpa(kpa_id.to_owned()))?;
    if method == PlanMethod::TwoTier && !kpa.supports_two_tier() {
        return Err(PlanError::TierMissing(kpa_id.to_owned()));
    }

    // lexicographic id order fixes every tie-break
    let mut params = kpa.parameter_ids();
    params.sort_unstable();
    let kernel = Kernel::new(kpa, &params, method);
    let start: Vec<u8> = params.iter().map(|p| assessment.level(p).value()).collect();
    let costs: Vec<f64> = params
        .iter()
        .map(|p| model.parameter(p).map_or(1.0, |d| d.step_cost))
        .collect();
    let current_level = kernel.level(&start);

    let mut plan = ImprovementPlan {
        kpa_id: kpa_id.to_owned(),
        method,
        target,
        current_level,
        steps: Vec::new(),
        total_cost: 0.0,
        achieved: true,
        exact: true,
        also_affects: Vec::new(),
    };
    if current_level >= target {
        return Ok(plan);
    }
    let maxed = vec![ScoreLevel::MAX.value(); params.len()];
    if kernel.level(&maxed) < target {
        return Err(PlanError::TargetUnreachable {
            kpa: kpa_id.to_owned(),
            target,
        });
    }

    let available: usize = start
        .iter()
        .map(|l| usize::from(ScoreLevel::MAX.value() - l))
        .sum();

    let mut exhaustive_result = None;
    if available <= options.exhaustive_threshold {
        let mut search = Search {
            kernel: &kernel,
            target,
            start: &start,
            costs: &costs,
            deadline: options.deadline,
            nodes: 0,
            timed_out: false,
            best: None,
        };
        let mut levels = start.clone();
        search.visit(0, &mut levels, 0.0);
        plan.exact = !search.timed_out;
        exhaustive_result = search.best.map(|(_, end)| steps_between(&params, &costs, &start, &end));
    } else {
        plan.exact = false;
    }

    plan.steps = match exhaustive_result {
        Some(steps) => steps,
        None => {
            let order = greedy(&kernel, target, &start, &costs).ok_or_else(|| {
                PlanError::TargetUnreachable {
                    kpa: kpa_id.to_owned(),
                    target,
                }
            })?;
            let mut levels = start.clone();
            order
                .into_iter()
                .map(|i| {
                    levels[i] += 1;
                    step(params[i], levels[i] - 1, costs[i])
                })
                .collect()
        }
    };
    plan.total_cost = plan.steps.iter().map(|s| s.cost).sum();

    let raised: Vec<&str> = plan.steps.iter().map(|s| s.parameter_id.as_str()).collect();
    plan.also_affects = model
        .kpas
        .iter()
        .filter(|k| k.id != kpa_id && raised.iter().any(|p| k.binds(p)))
        .map(|k| k.id.clone())
        .collect();
    Ok(plan)
}
