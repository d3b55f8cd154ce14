//! Validation and parse findings.

use std::fmt;

use serde::{Deserialize, Serialize};

/// Rule codes carried by [`Diagnostic`]s and API errors.
pub mod codes {
    // model structure
    pub const DUP_PARAM: &str = "DUP_PARAM";
    pub const DUP_KPA: &str = "DUP_KPA";
    pub const DUP_GOAL: &str = "DUP_GOAL";
    pub const DUP_BINDING: &str = "DUP_BINDING";
    pub const UNKNOWN_PARAM: &str = "UNKNOWN_PARAM";
    pub const ORPHAN_PARAM: &str = "ORPHAN_PARAM";
    pub const EMPTY_KPA: &str = "EMPTY_KPA";
    pub const EMPTY_GOAL: &str = "EMPTY_GOAL";
    pub const EMPTY_PLM: &str = "EMPTY_PLM";
    pub const BAD_WEIGHT: &str = "BAD_WEIGHT";
    pub const BAD_COST: &str = "BAD_COST";
    pub const BAD_VERSION: &str = "BAD_VERSION";
    pub const BAD_IDENT: &str = "BAD_IDENT";
    pub const BAD_TEXT: &str = "BAD_TEXT";

    // assessments
    pub const MODEL_MISMATCH: &str = "MODEL_MISMATCH";
    pub const UNSCORED_PARAM: &str = "UNSCORED_PARAM";
    pub const SCORE_RANGE: &str = "SCORE_RANGE";
    pub const DUP_SCORE: &str = "DUP_SCORE";
    pub const BAD_DATE: &str = "BAD_DATE";
    pub const UNKNOWN_STATUS: &str = "UNKNOWN_STATUS";

    // syntax
    pub const EMPTY_MODEL: &str = "EMPTY_MODEL";
    pub const EMPTY_ASSESSMENT: &str = "EMPTY_ASSESSMENT";
    pub const UNKNOWN_KEYWORD: &str = "UNKNOWN_KEYWORD";
    pub const UNKNOWN_CATEGORY: &str = "UNKNOWN_CATEGORY";
    pub const UNKNOWN_TIER: &str = "UNKNOWN_TIER";
    pub const BAD_NUMBER: &str = "BAD_NUMBER";
    pub const UNTERMINATED_STRING: &str = "UNTERMINATED_STRING";
    pub const BAD_ESCAPE: &str = "BAD_ESCAPE";
    pub const SYNTAX: &str = "SYNTAX";
    pub const MISSING_HEADER: &str = "MISSING_HEADER";
    pub const DUP_HEADER: &str = "DUP_HEADER";
    pub const MISPLACED: &str = "MISPLACED";
    pub const BOM: &str = "BOM";

    // scoring and planning
    pub const TIER_MISSING: &str = "TIER_MISSING";
    pub const OUT_OF_RANGE: &str = "OUT_OF_RANGE";
    pub const TARGET_UNREACHABLE: &str = "TARGET_UNREACHABLE";
    pub const UNKNOWN_KPA: &str = "UNKNOWN_KPA";

    // store and service
    pub const NOT_FOUND: &str = "NOT_FOUND";
    pub const CONFLICT: &str = "CONFLICT";
    pub const VALIDATION_FAILED: &str = "VALIDATION_FAILED";
    pub const CORRUPT: &str = "CORRUPT";
    pub const IO: &str = "IO";
    pub const MALFORMED_BODY: &str = "MALFORMED_BODY";
    pub const ID_MISMATCH: &str = "ID_MISMATCH";
    pub const BAD_REVISION: &str = "BAD_REVISION";
    pub const REVISION_REQUIRED: &str = "REVISION_REQUIRED";
    pub const BAD_QUERY: &str = "BAD_QUERY";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// A position in a source file. Lines and columns are 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceSpan {
    pub file: String,
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

/// The model element a diagnostic is about. Used to attach source locations
/// to findings produced on already-parsed values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Subject {
    Model,
    Parameter { id: String },
    Kpa { id: String },
    Goal { id: String },
    Binding { goal: String, parameter: String },
    Assessment,
    Score { parameter: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub rule_code: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub location: Option<SourceSpan>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<Subject>,
}

impl Diagnostic {
    pub fn error(rule_code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            rule_code: rule_code.to_owned(),
            message: message.into(),
            location: None,
            subject: None,
        }
    }

    pub fn warning(rule_code: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            ..Diagnostic::error(rule_code, message)
        }
    }

    pub fn at(mut self, span: SourceSpan) -> Self {
        self.location = Some(span);
        self
    }

    pub fn about(mut self, subject: Subject) -> Self {
        self.subject = Some(subject);
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(span) = &self.location {
            write!(f, "{span}: ")?;
        }
        write!(f, "{}[{}]: {}", self.severity, self.rule_code, self.message)
    }
}

/// True when any diagnostic in the slice is an error.
pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}
