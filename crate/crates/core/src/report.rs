//! Human-readable and machine-readable renderings of evaluations, and
//! comparisons between evaluations of the same model over time.
//!
//! Scores are displayed rounded to one decimal; levels always come from the
//! unrounded values. No rendering ever shows a total across KPAs.

use std::fmt::Write as _;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::diagnostic::codes;
use crate::planner::ImprovementPlan;
use crate::scoring::{EvaluationResult, MaturityLevel, PaEvaluation};

/// Characters in a completeness bar; one character per 5 points.
pub const BAR_WIDTH: usize = 20;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ReportError {
    #[error("cannot compare evaluations of {earlier} and {later}")]
    ModelMismatch { earlier: String, later: String },
}

impl ReportError {
    pub fn code(&self) -> &'static str {
        match self {
            ReportError::ModelMismatch { .. } => codes::MODEL_MISMATCH,
        }
    }
}

pub fn bar(score: f64) -> String {
    let filled = ((score / 100.0 * BAR_WIDTH as f64).floor().max(0.0) as usize).min(BAR_WIDTH);
    format!("[{}{}]", "#".repeat(filled), ".".repeat(BAR_WIDTH - filled))
}

fn write_pa(out: &mut String, result: &EvaluationResult, pa: &PaEvaluation) {
    let _ = writeln!(out, "\n[{}] {}", pa.kpa_id, pa.kpa_name);
    let _ = writeln!(out, "  PLM stage:     {}", pa.plm_stage);
    if result.method.includes_compensatory() {
        if let (Some(score), Some(level)) = (pa.compensatory_score, pa.compensatory_level) {
            let _ = writeln!(out, "  Compensatory:  {score:5.1}  {level}");
        }
    }
    if result.method.includes_two_tier() {
        match (pa.basic_score, pa.advanced_score, pa.two_tier_level) {
            (Some(b), Some(a), Some(level)) => {
                let _ = writeln!(out, "  Two-tier:      basic {b:.1} / advanced {a:.1}  {level}");
            }
            _ => {
                let _ = writeln!(out, "  Two-tier:      not applicable");
            }
        }
    }
    let id_width = pa.sg_scores.iter().map(|s| s.sg_id.len()).max().unwrap_or(0);
    let _ = writeln!(out, "  Specific goals:");
    for sg in &pa.sg_scores {
        let _ = writeln!(
            out,
            "    {:<id_width$}  {:<8}  {}  {:5.1}  {}",
            sg.sg_id,
            sg.tier.keyword(),
            bar(sg.completeness),
            sg.completeness,
            sg.name
        );
    }
    if !pa.category_breakdown.is_empty() {
        let _ = writeln!(out, "  Categories:");
        for (category, score) in &pa.category_breakdown {
            let _ = writeln!(out, "    {:<20}  {:5.1}", category.display_name(), score);
        }
    }
}

/// Plain-text report with one section per KPA.
pub fn render_text(result: &EvaluationResult) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Maturity evaluation");
    let _ = writeln!(
        out,
        "  assessment: {} (team {}, {})",
        result.assessment_id, result.team, result.date
    );
    let _ = writeln!(out, "  model:      {} v{}", result.model_id, result.model_version);
    let _ = writeln!(out, "  method:     {}", result.method);
    for pa in &result.pa_evaluations {
        write_pa(&mut out, result, pa);
    }
    if !result.diagnostics.is_empty() {
        let _ = writeln!(out, "\nWarnings:");
        for d in &result.diagnostics {
            let _ = writeln!(out, "  {d}");
        }
    }
    out
}

/// Pretty-printed JSON projection of an evaluation, newline terminated. Keys
/// follow declaration order; absent scores are omitted rather than null.
pub fn render_json(result: &EvaluationResult) -> String {
    let mut s = serde_json::to_string_pretty(result).expect("evaluation results serialize");
    s.push('\n');
    s
}

pub fn parse_json(text: &str) -> serde_json::Result<EvaluationResult> {
    serde_json::from_str(text)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Trend {
    Up,
    Down,
    Same,
}

impl Trend {
    fn of(delta: f64) -> Self {
        if delta > 0.0 {
            Trend::Up
        } else if delta < 0.0 {
            Trend::Down
        } else {
            Trend::Same
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Trend::Up => '↑',
            Trend::Down => '↓',
            Trend::Same => '=',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpaPoint {
    pub kpa_id: String,
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
}

/// Per-KPA snapshot of one evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendEntry {
    pub date: NaiveDate,
    pub assessment_id: String,
    pub kpas: Vec<KpaPoint>,
}

impl From<&EvaluationResult> for TrendEntry {
    fn from(r: &EvaluationResult) -> Self {
        TrendEntry {
            date: r.date,
            assessment_id: r.assessment_id.clone(),
            kpas: r
                .pa_evaluations
                .iter()
                .map(|pa| KpaPoint {
                    kpa_id: pa.kpa_id.clone(),
                    compensatory_score: pa.compensatory_score,
                    compensatory_level: pa.compensatory_level,
                    basic_score: pa.basic_score,
                    advanced_score: pa.advanced_score,
                    two_tier_level: pa.two_tier_level,
                })
                .collect(),
        }
    }
}

/// Snapshots sorted by date ascending; equal dates keep input order.
pub fn trend(results: &[EvaluationResult]) -> Vec<TrendEntry> {
    let mut entries: Vec<TrendEntry> = results.iter().map(TrendEntry::from).collect();
    entries.sort_by_key(|e| e.date);
    entries
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreDelta {
    pub before: f64,
    pub after: f64,
    pub delta: f64,
    pub trend: Trend,
}

impl ScoreDelta {
    fn between(before: Option<f64>, after: Option<f64>) -> Option<Self> {
        let (before, after) = (before?, after?);
        let delta = after - before;
        Some(ScoreDelta {
            before,
            after,
            delta,
            trend: Trend::of(delta),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelChange {
    pub before: MaturityLevel,
    pub after: MaturityLevel,
    pub trend: Trend,
}

impl LevelChange {
    fn between(before: Option<MaturityLevel>, after: Option<MaturityLevel>) -> Option<Self> {
        let (before, after) = (before?, after?);
        let trend = match after.cmp(&before) {
            std::cmp::Ordering::Greater => Trend::Up,
            std::cmp::Ordering::Less => Trend::Down,
            std::cmp::Ordering::Equal => Trend::Same,
        };
        Some(LevelChange {
            before,
            after,
            trend,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KpaDelta {
    pub kpa_id: String,
    pub kpa_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compensatory: Option<ScoreDelta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub compensatory_level: Option<LevelChange>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basic: Option<ScoreDelta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub advanced: Option<ScoreDelta>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub two_tier_level: Option<LevelChange>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub model_id: String,
    pub model_version: u32,
    pub earlier: TrendEntry,
    pub later: TrendEntry,
    pub kpas: Vec<KpaDelta>,
}

/// Per-KPA score deltas and level transitions between two evaluations of
/// the same model version.
pub fn diff(earlier: &EvaluationResult, later: &EvaluationResult) -> Result<Comparison, ReportError> {
    if earlier.model_id != later.model_id || earlier.model_version != later.model_version {
        return Err(ReportError::ModelMismatch {
            earlier: format!("{} v{}", earlier.model_id, earlier.model_version),
            later: format!("{} v{}", later.model_id, later.model_version),
        });
    }
    let kpas = earlier
        .pa_evaluations
        .iter()
        .filter_map(|before| {
            let after = later.pa(&before.kpa_id)?;
            Some(KpaDelta {
                kpa_id: before.kpa_id.clone(),
                kpa_name: before.kpa_name.clone(),
                compensatory: ScoreDelta::between(before.compensatory_score, after.compensatory_score),
                compensatory_level: LevelChange::between(
                    before.compensatory_level,
                    after.compensatory_level,
                ),
                basic: ScoreDelta::between(before.basic_score, after.basic_score),
                advanced: ScoreDelta::between(before.advanced_score, after.advanced_score),
                two_tier_level: LevelChange::between(before.two_tier_level, after.two_tier_level),
            })
        })
        .collect();
    Ok(Comparison {
        model_id: earlier.model_id.clone(),
        model_version: earlier.model_version,
        earlier: TrendEntry::from(earlier),
        later: TrendEntry::from(later),
        kpas,
    })
}

fn write_delta(out: &mut String, label: &str, d: &ScoreDelta, level: Option<&LevelChange>) {
    let _ = write!(
        out,
        "  {label:<13} {:5.1} -> {:5.1}  {:+.1} {}",
        d.before,
        d.after,
        d.delta,
        d.trend.symbol()
    );
    if let Some(l) = level {
        if l.before == l.after {
            let _ = write!(out, "  {} =", l.after);
        } else {
            let _ = write!(out, "  {} -> {} {}", l.before, l.after, l.trend.symbol());
        }
    }
    out.push('\n');
}

pub fn render_diff_text(c: &Comparison) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "Maturity comparison for {} v{}", c.model_id, c.model_version);
    let _ = writeln!(out, "  before: {} ({})", c.earlier.assessment_id, c.earlier.date);
    let _ = writeln!(out, "  after:  {} ({})", c.later.assessment_id, c.later.date);
    for k in &c.kpas {
        let _ = writeln!(out, "\n[{}] {}", k.kpa_id, k.kpa_name);
        if let Some(d) = &k.compensatory {
            write_delta(&mut out, "compensatory", d, k.compensatory_level.as_ref());
        }
        if let Some(d) = &k.basic {
            write_delta(&mut out, "basic", d, None);
        }
        if let Some(d) = &k.advanced {
            write_delta(&mut out, "advanced", d, k.two_tier_level.as_ref());
        }
        if k.basic.is_none() && k.advanced.is_none() {
            let _ = writeln!(out, "  two-tier:     not applicable");
        }
    }
    out
}

pub fn render_plan_text(plan: &ImprovementPlan) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Improvement plan for {} ({}): {} -> {}",
        plan.kpa_id, plan.method, plan.current_level, plan.target
    );
    if plan.steps.is_empty() {
        let _ = writeln!(out, "no steps needed");
        return out;
    }
    for (i, s) in plan.steps.iter().enumerate() {
        let _ = writeln!(
            out,
            "  {:>2}. {}  {} -> {}  cost {}",
            i + 1,
            s.parameter_id,
            s.from_level,
            s.to_level,
            s.cost
        );
    }
    let _ = writeln!(
        out,
        "total cost {}{}",
        plan.total_cost,
        if plan.exact { " (minimal)" } else { " (heuristic, may not be minimal)" }
    );
    if !plan.also_affects.is_empty() {
        let _ = writeln!(out, "also raises parameters used by: {}", plan.also_affects.join(", "));
    }
    out
}
