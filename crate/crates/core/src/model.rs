//! Maturity model domain types and structural validation.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::diagnostic::{codes, Diagnostic, Subject};

/// Longest identifier accepted anywhere in a model or assessment.
pub const MAX_IDENT_LEN: usize = 64;

/// Identifiers are 1..=64 ASCII letters, digits, `.`, `_` or `-`.
pub fn is_valid_identifier(s: &str) -> bool {
    !s.is_empty()
        && s.len() <= MAX_IDENT_LEN
        && s
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'.' | b'_' | b'-'))
}

/// Display strings must be representable on a single line of the text format.
pub(crate) fn is_valid_text(s: &str) -> bool {
    !s.chars().any(char::is_control)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterCategory {
    ProcessQuality,
    EstimationAccuracy,
    ProductQuality,
    TeamQuality,
    TechnologyQuality,
}

impl ParameterCategory {
    pub const ALL: [ParameterCategory; 5] = [
        ParameterCategory::ProcessQuality,
        ParameterCategory::EstimationAccuracy,
        ParameterCategory::ProductQuality,
        ParameterCategory::TeamQuality,
        ParameterCategory::TechnologyQuality,
    ];

    /// Keyword used in the model language.
    pub fn keyword(self) -> &'static str {
        match self {
            ParameterCategory::ProcessQuality => "process",
            ParameterCategory::EstimationAccuracy => "estimation",
            ParameterCategory::ProductQuality => "product",
            ParameterCategory::TeamQuality => "team",
            ParameterCategory::TechnologyQuality => "technology",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.keyword() == s)
    }

    pub fn display_name(self) -> &'static str {
        match self {
            ParameterCategory::ProcessQuality => "Process Quality",
            ParameterCategory::EstimationAccuracy => "Estimation Accuracy",
            ParameterCategory::ProductQuality => "Product Quality",
            ParameterCategory::TeamQuality => "Team Quality",
            ParameterCategory::TechnologyQuality => "Technology Quality",
        }
    }
}

impl fmt::Display for ParameterCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.display_name())
    }
}

/// Goal classification used by the two-tier method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Basic,
    Advanced,
}

impl Tier {
    pub fn keyword(self) -> &'static str {
        match self {
            Tier::Basic => "basic",
            Tier::Advanced => "advanced",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        match s {
            "basic" => Some(Tier::Basic),
            "advanced" => Some(Tier::Advanced),
            _ => None,
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// The three-level scoring scale of a parameter.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum ScoreLevel {
    /// Not available, not used, not defined or unaware.
    #[default]
    NotAvailable = 0,
    /// Known and used, but not written down.
    Implicit = 1,
    /// Written down and institutionalized.
    Explicit = 2,
}

impl ScoreLevel {
    pub const MAX: ScoreLevel = ScoreLevel::Explicit;

    pub fn value(self) -> u8 {
        self as u8
    }

    pub fn from_value(v: u8) -> Option<Self> {
        match v {
            0 => Some(ScoreLevel::NotAvailable),
            1 => Some(ScoreLevel::Implicit),
            2 => Some(ScoreLevel::Explicit),
            _ => None,
        }
    }

    /// The next level up, or `None` at [`ScoreLevel::Explicit`].
    pub fn next(self) -> Option<Self> {
        Self::from_value(self.value() + 1)
    }

    pub fn label(self) -> &'static str {
        match self {
            ScoreLevel::NotAvailable => "not available",
            ScoreLevel::Implicit => "implicit",
            ScoreLevel::Explicit => "explicit",
        }
    }
}

impl TryFrom<u8> for ScoreLevel {
    type Error = String;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        ScoreLevel::from_value(v).ok_or_else(|| format!("score level {v} is not one of 0, 1, 2"))
    }
}

impl From<ScoreLevel> for u8 {
    fn from(level: ScoreLevel) -> u8 {
        level.value()
    }
}

impl fmt::Display for ScoreLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value())
    }
}

fn default_step_cost() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterDef {
    pub id: String,
    pub description: String,
    pub category: ParameterCategory,
    /// Effort units for one score-level increment.
    #[serde(default = "default_step_cost")]
    pub step_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterBinding {
    pub parameter_id: String,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecificGoalDef {
    pub id: String,
    pub name: String,
    pub tier: Tier,
    pub bindings: Vec<ParameterBinding>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpaDef {
    pub id: String,
    pub name: String,
    pub plm_stage: String,
    pub goals: Vec<SpecificGoalDef>,
}

impl KpaDef {
    pub fn has_tier(&self, tier: Tier) -> bool {
        self.goals.iter().any(|g| g.tier == tier)
    }

    /// Both a basic and an advanced goal are present, so the two-tier
    /// method applies.
    pub fn supports_two_tier(&self) -> bool {
        self.has_tier(Tier::Basic) && self.has_tier(Tier::Advanced)
    }

    /// Distinct parameter ids bound by any goal of this KPA, in first-use order.
    pub fn parameter_ids(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.goals
            .iter()
            .flat_map(|g| g.bindings.iter())
            .map(|b| b.parameter_id.as_str())
            .filter(|id| seen.insert(*id))
            .collect()
    }

    pub fn binds(&self, parameter_id: &str) -> bool {
        self.goals
            .iter()
            .any(|g| g.bindings.iter().any(|b| b.parameter_id == parameter_id))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaturityModel {
    pub id: String,
    pub name: String,
    pub version: u32,
    pub parameters: Vec<ParameterDef>,
    pub kpas: Vec<KpaDef>,
}

impl MaturityModel {
    pub fn parameter(&self, id: &str) -> Option<&ParameterDef> {
        self.parameters.iter().find(|p| p.id == id)
    }

    pub fn kpa(&self, id: &str) -> Option<&KpaDef> {
        self.kpas.iter().find(|k| k.id == id)
    }

    pub fn goals(&self) -> impl Iterator<Item = &SpecificGoalDef> {
        self.kpas.iter().flat_map(|k| k.goals.iter())
    }

    /// Position of each parameter in the pool.
    pub fn pool_index(&self) -> HashMap<&str, usize> {
        self.parameters
            .iter()
            .enumerate()
            .map(|(i, p)| (p.id.as_str(), i))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssessmentStatus {
    #[default]
    Draft,
    Reviewed,
    Final,
}

impl AssessmentStatus {
    pub fn keyword(self) -> &'static str {
        match self {
            AssessmentStatus::Draft => "draft",
            AssessmentStatus::Reviewed => "reviewed",
            AssessmentStatus::Final => "final",
        }
    }
}

impl FromStr for AssessmentStatus {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        match s {
            "draft" => Ok(AssessmentStatus::Draft),
            "reviewed" => Ok(AssessmentStatus::Reviewed),
            "final" => Ok(AssessmentStatus::Final),
            _ => Err(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Score {
    pub level: ScoreLevel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Score {
    pub fn new(level: ScoreLevel) -> Self {
        Score { level, note: None }
    }

    pub fn with_note(level: ScoreLevel, note: impl Into<String>) -> Self {
        Score {
            level,
            note: Some(note.into()),
        }
    }
}

/// One team's dated set of parameter scores. Shared parameters are scored
/// once and reused by every goal that binds them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assessment {
    pub id: String,
    pub model_id: String,
    pub model_version: u32,
    pub date: NaiveDate,
    pub team: String,
    #[serde(default)]
    pub status: AssessmentStatus,
    #[serde(default)]
    pub scores: BTreeMap<String, Score>,
}

impl Assessment {
    /// Score level of a parameter; unscored parameters count as
    /// [`ScoreLevel::NotAvailable`].
    pub fn level(&self, parameter_id: &str) -> ScoreLevel {
        self.scores
            .get(parameter_id)
            .map(|s| s.level)
            .unwrap_or_default()
    }

    pub fn levels(&self) -> BTreeMap<String, ScoreLevel> {
        self.scores
            .iter()
            .map(|(id, s)| (id.clone(), s.level))
            .collect()
    }
}

/// Read access to parameter score levels. Missing entries are level 0.
pub trait ScoreLookup {
    fn level(&self, parameter_id: &str) -> ScoreLevel;
}

impl ScoreLookup for Assessment {
    fn level(&self, parameter_id: &str) -> ScoreLevel {
        Assessment::level(self, parameter_id)
    }
}

impl ScoreLookup for BTreeMap<String, ScoreLevel> {
    fn level(&self, parameter_id: &str) -> ScoreLevel {
        self.get(parameter_id).copied().unwrap_or_default()
    }
}

impl<S: std::hash::BuildHasher> ScoreLookup for HashMap<String, ScoreLevel, S> {
    fn level(&self, parameter_id: &str) -> ScoreLevel {
        self.get(parameter_id).copied().unwrap_or_default()
    }
}

impl<S: std::hash::BuildHasher> ScoreLookup for HashMap<&str, ScoreLevel, S> {
    fn level(&self, parameter_id: &str) -> ScoreLevel {
        self.get(parameter_id).copied().unwrap_or_default()
    }
}

impl<T: ScoreLookup + ?Sized> ScoreLookup for &T {
    fn level(&self, parameter_id: &str) -> ScoreLevel {
        (**self).level(parameter_id)
    }
}

fn check_ident(out: &mut Vec<Diagnostic>, what: &str, id: &str, subject: Subject) {
    if !is_valid_identifier(id) {
        out.push(
            Diagnostic::error(
                codes::BAD_IDENT,
                format!(
                    "{what} id {id:?} must be 1-{MAX_IDENT_LEN} ASCII letters, digits, '.', '_' or '-'"
                ),
            )
            .about(subject),
        );
    }
}

fn check_text(out: &mut Vec<Diagnostic>, what: &str, text: &str, subject: Subject) {
    if !is_valid_text(text) {
        out.push(
            Diagnostic::error(codes::BAD_TEXT, format!("{what} contains control characters"))
                .about(subject),
        );
    }
}

/// Checks the structural invariants of a model. Returns one diagnostic per
/// violation, in model order; an empty result means the model is valid.
pub fn validate_model(model: &MaturityModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    check_ident(&mut out, "model", &model.id, Subject::Model);
    check_text(&mut out, "model name", &model.name, Subject::Model);
    if model.version == 0 {
        out.push(
            Diagnostic::error(codes::BAD_VERSION, "model version must be a positive integer")
                .about(Subject::Model),
        );
    }

    let mut pool = HashSet::new();
    for p in &model.parameters {
        let subject = || Subject::Parameter { id: p.id.clone() };
        check_ident(&mut out, "parameter", &p.id, subject());
        if !pool.insert(p.id.as_str()) {
            out.push(
                Diagnostic::error(codes::DUP_PARAM, format!("parameter {} declared twice", p.id))
                    .about(subject()),
            );
        }
        check_text(&mut out, "parameter description", &p.description, subject());
        if !(p.step_cost.is_finite() && p.step_cost > 0.0) {
            out.push(
                Diagnostic::error(
                    codes::BAD_COST,
                    format!("parameter {} has step cost {}, expected > 0", p.id, p.step_cost),
                )
                .about(subject()),
            );
        }
    }

    let mut kpa_ids = HashSet::new();
    let mut goal_ids = HashSet::new();
    let mut used = HashSet::new();
    for kpa in &model.kpas {
        let subject = || Subject::Kpa { id: kpa.id.clone() };
        check_ident(&mut out, "KPA", &kpa.id, subject());
        if !kpa_ids.insert(kpa.id.as_str()) {
            out.push(
                Diagnostic::error(codes::DUP_KPA, format!("KPA {} declared twice", kpa.id))
                    .about(subject()),
            );
        }
        check_text(&mut out, "KPA name", &kpa.name, subject());
        check_text(&mut out, "PLM stage", &kpa.plm_stage, subject());
        if kpa.plm_stage.trim().is_empty() {
            out.push(
                Diagnostic::error(codes::EMPTY_PLM, format!("KPA {} has no PLM stage", kpa.id))
                    .about(subject()),
            );
        }
        if kpa.goals.is_empty() {
            out.push(
                Diagnostic::error(codes::EMPTY_KPA, format!("KPA {} has no goals", kpa.id))
                    .about(subject()),
            );
        }

        for goal in &kpa.goals {
            let subject = || Subject::Goal { id: goal.id.clone() };
            check_ident(&mut out, "goal", &goal.id, subject());
            if !goal_ids.insert(goal.id.as_str()) {
                out.push(
                    Diagnostic::error(codes::DUP_GOAL, format!("goal {} declared twice", goal.id))
                        .about(subject()),
                );
            }
            check_text(&mut out, "goal name", &goal.name, subject());
            if goal.bindings.is_empty() {
                out.push(
                    Diagnostic::error(
                        codes::EMPTY_GOAL,
                        format!("goal {} uses no parameters", goal.id),
                    )
                    .about(subject()),
                );
            }

            let mut bound = HashSet::new();
            for b in &goal.bindings {
                let subject = || Subject::Binding {
                    goal: goal.id.clone(),
                    parameter: b.parameter_id.clone(),
                };
                if pool.contains(b.parameter_id.as_str()) {
                    used.insert(b.parameter_id.as_str());
                } else {
                    out.push(
                        Diagnostic::error(
                            codes::UNKNOWN_PARAM,
                            format!("goal {} uses unknown parameter {}", goal.id, b.parameter_id),
                        )
                        .about(subject()),
                    );
                }
                if !bound.insert(b.parameter_id.as_str()) {
                    out.push(
                        Diagnostic::error(
                            codes::DUP_BINDING,
                            format!("goal {} uses parameter {} twice", goal.id, b.parameter_id),
                        )
                        .about(subject()),
                    );
                }
                if !(b.weight.is_finite() && b.weight > 0.0) {
                    out.push(
                        Diagnostic::error(
                            codes::BAD_WEIGHT,
                            format!(
                                "goal {} weights {} by {}, expected > 0",
                                goal.id, b.parameter_id, b.weight
                            ),
                        )
                        .about(subject()),
                    );
                }
            }
        }
    }

    let mut reported = HashSet::new();
    for p in &model.parameters {
        if !used.contains(p.id.as_str()) && reported.insert(p.id.as_str()) {
            out.push(
                Diagnostic::error(
                    codes::ORPHAN_PARAM,
                    format!("parameter {} is not used by any goal", p.id),
                )
                .about(Subject::Parameter { id: p.id.clone() }),
            );
        }
    }

    out
}

/// Checks an assessment against the model it claims to score. Unknown
/// parameters and model mismatches are errors; unscored pool parameters are
/// warnings (they evaluate as level 0).
pub fn validate_assessment(assessment: &Assessment, model: &MaturityModel) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    check_ident(&mut out, "assessment", &assessment.id, Subject::Assessment);
    check_ident(&mut out, "model", &assessment.model_id, Subject::Assessment);
    check_text(&mut out, "team", &assessment.team, Subject::Assessment);
    if assessment.model_id != model.id || assessment.model_version != model.version {
        out.push(
            Diagnostic::error(
                codes::MODEL_MISMATCH,
                format!(
                    "assessment {} targets model {} version {}, but model is {} version {}",
                    assessment.id,
                    assessment.model_id,
                    assessment.model_version,
                    model.id,
                    model.version
                ),
            )
            .about(Subject::Assessment),
        );
    }

    for (id, score) in &assessment.scores {
        let subject = || Subject::Score {
            parameter: id.clone(),
        };
        if model.parameter(id).is_none() {
            out.push(
                Diagnostic::error(
                    codes::UNKNOWN_PARAM,
                    format!("score for unknown parameter {id}"),
                )
                .about(subject()),
            );
        }
        if let Some(note) = &score.note {
            check_text(&mut out, "note", note, subject());
        }
    }

    for p in &model.parameters {
        if !assessment.scores.contains_key(&p.id) {
            out.push(
                Diagnostic::warning(
                    codes::UNSCORED_PARAM,
                    format!("parameter {} is not scored; counted as 0", p.id),
                )
                .about(Subject::Parameter { id: p.id.clone() }),
            );
        }
    }

    out
}
