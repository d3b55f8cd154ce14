//! Software maturity model toolkit.
//!
//! A maturity model is a pool of measurable parameters, grouped into key
//! process areas (KPAs) through specific goals (SGs). Each parameter is scored
//! 0 (not available), 1 (implicit) or 2 (explicit) by an assessment, and the
//! scores are aggregated per KPA with two methods:
//!
//! - **compensatory**: weighted SG completeness averaged over all goals of a KPA;
//! - **two-tier**: separate averages for basic and advanced goals, interpreted
//!   jointly so strong advanced goals cannot hide weak basic ones.
//!
//! Results are reported per KPA only. There is deliberately no overall score.
//!
//! Modules:
//! - [`model`]: domain types and structural validation
//! - [`text`]: the `.smmdl` / `.smma` text formats
//! - [`scoring`]: aggregation and level interpretation
//! - [`planner`]: minimum-cost improvement plans and what-if evaluation
//! - [`report`]: text/JSON rendering and comparisons between evaluations
//! - [`store`]: file-backed persistence with optimistic revisions

pub mod diagnostic;
pub mod model;
pub mod planner;
pub mod report;
pub mod scoring;
pub mod store;
pub mod text;

pub use diagnostic::{Diagnostic, Severity, SourceSpan, Subject};
pub use model::{
    validate_assessment, validate_model, Assessment, AssessmentStatus, KpaDef, MaturityModel,
    ParameterBinding, ParameterCategory, ParameterDef, Score, ScoreLevel, SpecificGoalDef, Tier,
};
pub use planner::{plan, what_if, ImprovementPlan, ImprovementStep, PlanMethod, PlanOptions};
pub use scoring::{evaluate, EvaluationResult, MaturityLevel, Method, PaEvaluation, SgScore};
pub use text::{parse_assessment, parse_model, serialize_assessment, serialize_model};
