//! Score aggregation and maturity level interpretation.
//!
//! Goal completeness is the weighted parameter score normalized by the
//! maximum attainable weighted sum, on a 0-100 scale. KPAs are then scored by
//! two methods:
//!
//! - compensatory: unweighted mean of all goal completeness values;
//! - two-tier: separate means over basic and advanced goals, interpreted
//!   jointly.
//!
//! Level boundaries are half-open and lower-inclusive, with 100 belonging to
//! the top level. Comparisons are exact.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostic::{codes, has_errors, Diagnostic, Subject};
use crate::model::{
    validate_assessment, validate_model, Assessment, KpaDef, MaturityModel, ParameterCategory,
    ScoreLookup, SpecificGoalDef, Tier,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaturityLevel {
    Initial,
    Intermediate,
    Advanced,
    Optimizing,
}

impl MaturityLevel {
    pub const ALL: [MaturityLevel; 4] = [
        MaturityLevel::Initial,
        MaturityLevel::Intermediate,
        MaturityLevel::Advanced,
        MaturityLevel::Optimizing,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MaturityLevel::Initial => "Initial",
            MaturityLevel::Intermediate => "Intermediate",
            MaturityLevel::Advanced => "Advanced",
            MaturityLevel::Optimizing => "Optimizing",
        }
    }
}

impl fmt::Display for MaturityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Case-insensitive; `optimized` is accepted as an alias of `optimizing`.
impl FromStr for MaturityLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "initial" => Ok(MaturityLevel::Initial),
            "intermediate" => Ok(MaturityLevel::Intermediate),
            "advanced" => Ok(MaturityLevel::Advanced),
            "optimizing" | "optimized" => Ok(MaturityLevel::Optimizing),
            _ => Err(format!(
                "unknown level `{s}`; expected initial, intermediate, advanced or optimizing"
            )),
        }
    }
}

/// Which aggregation methods an evaluation reports.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "compensatory")]
    Compensatory,
    #[serde(rename = "two-tier")]
    TwoTier,
    #[default]
    #[serde(rename = "both")]
    Both,
}

impl Method {
    pub fn keyword(self) -> &'static str {
        match self {
            Method::Compensatory => "compensatory",
            Method::TwoTier => "two-tier",
            Method::Both => "both",
        }
    }

    pub fn includes_compensatory(self) -> bool {
        matches!(self, Method::Compensatory | Method::Both)
    }

    pub fn includes_two_tier(self) -> bool {
        matches!(self, Method::TwoTier | Method::Both)
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "compensatory" => Ok(Method::Compensatory),
            "two-tier" | "two_tier" | "twotier" => Ok(Method::TwoTier),
            "both" => Ok(Method::Both),
            _ => Err(format!(
                "unknown method `{s}`; expected compensatory, two-tier or both"
            )),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScoringError {
    #[error("goal {goal} uses no parameters")]
    EmptyGoal { goal: String },
    #[error("score {value} is outside [0, 100]")]
    OutOfRange { value: f64 },
    #[error("KPA {kpa} needs at least one basic and one advanced goal for the two-tier method")]
    TierMissing { kpa: String },
}

impl ScoringError {
    pub fn code(&self) -> &'static str {
        match self {
            ScoringError::EmptyGoal { .. } => codes::EMPTY_GOAL,
            ScoringError::OutOfRange { .. } => codes::OUT_OF_RANGE,
            ScoringError::TierMissing { .. } => codes::TIER_MISSING,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error("model or assessment failed validation ({} findings)", .0.len())]
    Invalid(Vec<Diagnostic>),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

impl EvaluationError {
    pub fn code(&self) -> &'static str {
        match self {
            EvaluationError::Invalid(_) => codes::VALIDATION_FAILED,
            EvaluationError::Scoring(e) => e.code(),
        }
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        match self {
            EvaluationError::Invalid(d) => d,
            EvaluationError::Scoring(_) => &[],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SgScore {
    pub sg_id: String,
    pub name: String,
    pub tier: Tier,
    pub completeness: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaEvaluation {
    pub kpa_id: String,
    pub kpa_name: String,
    pub plm_stage: String,
    pub sg_scores: Vec<SgScore>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compensatory_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compensatory_level: Option<MaturityLevel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basic_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advanced_score: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_tier_level: Option<MaturityLevel>,
    /// Entries only for categories the KPA binds at least one parameter of.
    pub category_breakdown: BTreeMap<ParameterCategory, f64>,
}

/// Per-KPA evaluation of one assessment. Deliberately carries no score
/// aggregated across KPAs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub assessment_id: String,
    pub model_id: String,
    pub model_version: u32,
    pub team: String,
    pub date: NaiveDate,
    pub method: Method,
    pub pa_evaluations: Vec<PaEvaluation>,
    #[serde(default)]
    pub diagnostics: Vec<Diagnostic>,
}

impl EvaluationResult {
    pub fn pa(&self, kpa_id: &str) -> Option<&PaEvaluation> {
        self.pa_evaluations.iter().find(|p| p.kpa_id == kpa_id)
    }

    /// Drops the fields of methods not selected by `method`.
    pub fn for_method(mut self, method: Method) -> Self {
        self.method = method;
        for pa in &mut self.pa_evaluations {
            if !method.includes_compensatory() {
                pa.compensatory_score = None;
                pa.compensatory_level = None;
            }
            if !method.includes_two_tier() {
                pa.basic_score = None;
                pa.advanced_score = None;
                pa.two_tier_level = None;
            }
        }
        self
    }
}

/// Weighted completeness of one goal: `100 * sum(w*s) / (2 * sum(w))`.
pub fn sg_completeness(
    goal: &SpecificGoalDef,
    scores: &impl ScoreLookup,
) -> Result<f64, ScoringError> {
    if goal.bindings.is_empty() {
        return Err(ScoringError::EmptyGoal {
            goal: goal.id.clone(),
        });
    }
    let (achieved, total_weight) = goal.bindings.iter().fold((0.0, 0.0), |(a, w), b| {
        let level = f64::from(scores.level(&b.parameter_id).value());
        (a + b.weight * level, w + b.weight)
    });
    Ok(100.0 * achieved / (2.0 * total_weight))
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values
        .into_iter()
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

fn check_range(value: f64) -> Result<(), ScoringError> {
    if (0.0..=100.0).contains(&value) {
        Ok(())
    } else {
        Err(ScoringError::OutOfRange { value })
    }
}

/// `[0,30)` Initial, `[30,60)` Intermediate, `[60,80)` Advanced,
/// `[80,100]` Optimizing.
pub fn interpret_compensatory(score: f64) -> Result<MaturityLevel, ScoringError> {
    check_range(score)?;
    Ok(if score < 30.0 {
        MaturityLevel::Initial
    } else if score < 60.0 {
        MaturityLevel::Intermediate
    } else if score < 80.0 {
        MaturityLevel::Advanced
    } else {
        MaturityLevel::Optimizing
    })
}

/// Basic alone gates Initial (< 50) and Intermediate (< 80). From basic 80
/// up, advanced decides: < 20 stays Intermediate, < 50 Advanced, otherwise
/// Optimizing.
pub fn interpret_two_tier(basic: f64, advanced: f64) -> Result<MaturityLevel, ScoringError> {
    check_range(basic)?;
    check_range(advanced)?;
    Ok(if basic < 50.0 {
        MaturityLevel::Initial
    } else if basic < 80.0 || advanced < 20.0 {
        MaturityLevel::Intermediate
    } else if advanced < 50.0 {
        MaturityLevel::Advanced
    } else {
        MaturityLevel::Optimizing
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompensatoryScore {
    pub score: f64,
    pub level: MaturityLevel,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoTierScore {
    pub basic: f64,
    pub advanced: f64,
    pub level: MaturityLevel,
}

fn completeness_of(sg: &[SgScore]) -> impl Iterator<Item = f64> + '_ {
    sg.iter().map(|s| s.completeness)
}

fn sg_scores(kpa: &KpaDef, scores: &impl ScoreLookup) -> Result<Vec<SgScore>, ScoringError> {
    kpa.goals
        .iter()
        .map(|g| {
            Ok(SgScore {
                sg_id: g.id.clone(),
                name: g.name.clone(),
                tier: g.tier,
                completeness: sg_completeness(g, scores)?,
            })
        })
        .collect()
}

fn compensatory_from(kpa: &KpaDef, sg: &[SgScore]) -> Result<CompensatoryScore, ScoringError> {
    let score = mean(completeness_of(sg)).ok_or_else(|| ScoringError::EmptyGoal {
        goal: kpa.id.clone(),
    })?;
    Ok(CompensatoryScore {
        score,
        level: interpret_compensatory(score)?,
    })
}

fn two_tier_from(kpa: &KpaDef, sg: &[SgScore]) -> Result<TwoTierScore, ScoringError> {
    let tier_mean = |tier| mean(sg.iter().filter(|s| s.tier == tier).map(|s| s.completeness));
    match (tier_mean(Tier::Basic), tier_mean(Tier::Advanced)) {
        (Some(basic), Some(advanced)) => Ok(TwoTierScore {
            basic,
            advanced,
            level: interpret_two_tier(basic, advanced)?,
        }),
        _ => Err(ScoringError::TierMissing {
            kpa: kpa.id.clone(),
        }),
    }
}

/// Unweighted mean of all goals' completeness, both tiers included.
pub fn compensatory_pa(
    kpa: &KpaDef,
    scores: &impl ScoreLookup,
) -> Result<CompensatoryScore, ScoringError> {
    compensatory_from(kpa, &sg_scores(kpa, scores)?)
}

pub fn two_tier_pa(kpa: &KpaDef, scores: &impl ScoreLookup) -> Result<TwoTierScore, ScoringError> {
    if !kpa.supports_two_tier() {
        return Err(ScoringError::TierMissing {
            kpa: kpa.id.clone(),
        });
    }
    two_tier_from(kpa, &sg_scores(kpa, scores)?)
}

/// Per-category completeness over the KPA's bindings, using the same
/// normalization as goals. Categories without bindings are absent.
pub fn category_breakdown(
    model: &MaturityModel,
    kpa: &KpaDef,
    scores: &impl ScoreLookup,
) -> BTreeMap<ParameterCategory, f64> {
    let mut sums: BTreeMap<ParameterCategory, (f64, f64)> = BTreeMap::new();
    for b in kpa.goals.iter().flat_map(|g| &g.bindings) {
        let Some(param) = model.parameter(&b.parameter_id) else {
            continue;
        };
        let level = f64::from(scores.level(&b.parameter_id).value());
        let entry = sums.entry(param.category).or_default();
        entry.0 += b.weight * level;
        entry.1 += b.weight;
    }
    sums.into_iter()
        .map(|(c, (achieved, weight))| (c, 100.0 * achieved / (2.0 * weight)))
        .collect()
}

/// Evaluates one KPA under both methods. Two-tier fields stay empty when the
/// KPA lacks a basic or an advanced goal.
pub fn evaluate_kpa(
    model: &MaturityModel,
    kpa: &KpaDef,
    scores: &impl ScoreLookup,
) -> Result<PaEvaluation, ScoringError> {
    let sg = sg_scores(kpa, scores)?;
    let comp = compensatory_from(kpa, &sg)?;
    let two_tier = match two_tier_from(kpa, &sg) {
        Ok(t) => Some(t),
        Err(ScoringError::TierMissing { .. }) => None,
        Err(e) => return Err(e),
    };
    Ok(PaEvaluation {
        kpa_id: kpa.id.clone(),
        kpa_name: kpa.name.clone(),
        plm_stage: kpa.plm_stage.clone(),
        sg_scores: sg,
        compensatory_score: Some(comp.score),
        compensatory_level: Some(comp.level),
        basic_score: two_tier.map(|t| t.basic),
        advanced_score: two_tier.map(|t| t.advanced),
        two_tier_level: two_tier.map(|t| t.level),
        category_breakdown: category_breakdown(model, kpa, scores),
    })
}

/// Validates both inputs, then evaluates every KPA under both methods.
/// Warnings (unscored parameters, KPAs where two-tier does not apply) are
/// carried in the result; any error aborts without a partial result.
pub fn evaluate(
    model: &MaturityModel,
    assessment: &Assessment,
) -> Result<EvaluationResult, EvaluationError> {
    let mut diagnostics = validate_model(model);
    if !has_errors(&diagnostics) {
        diagnostics.extend(validate_assessment(assessment, model));
    }
    if has_errors(&diagnostics) {
        return Err(EvaluationError::Invalid(diagnostics));
    }

    let pa_evaluations = model
        .kpas
        .iter()
        .map(|kpa| evaluate_kpa(model, kpa, assessment))
        .collect::<Result<Vec<_>, _>>()?;

    for kpa in model.kpas.iter().filter(|k| !k.supports_two_tier()) {
        diagnostics.push(
            Diagnostic::warning(
                codes::TIER_MISSING,
                format!(
                    "KPA {} lacks a basic or an advanced goal; two-tier method not applicable",
                    kpa.id
                ),
            )
            .about(Subject::Kpa { id: kpa.id.clone() }),
        );
    }

    Ok(EvaluationResult {
        assessment_id: assessment.id.clone(),
        model_id: model.id.clone(),
        model_version: model.version,
        team: assessment.team.clone(),
        date: assessment.date,
        method: Method::Both,
        pa_evaluations,
        diagnostics,
    })
}
