//! The maturity-model definition language (`.smmdl`) and the assessment
//! score format (`.smma`).
//!
//! Both formats are line oriented and keyword led; `#` starts a comment
//! outside strings. Indentation is cosmetic: a `goal` attaches to the most
//! recent `kpa` and a `uses` to the most recent `goal`.
//!
//! ```text
//! model <id> "<name>" version <int>
//! param <id> "<description>" category <process|estimation|product|team|technology> [cost <number>]
//! kpa <id> "<name>" plm "<stage>"
//!   goal <id> "<name>" tier <basic|advanced>
//!     uses <param-id> weight <number>
//! ```
//!
//! ```text
//! assessment "<id>" model "<model-id>" version <int> team "<team>" date <YYYY-MM-DD> [status <draft|reviewed|final>]
//! status <draft|reviewed|final>
//! score <param-id> <0|1|2> [note "<text>"]
//! ```
//!
//! Parsers collect every independent error in one pass. Serializers emit the
//! canonical form, which parses back to a structurally identical value.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use chrono::NaiveDate;

use crate::diagnostic::{codes, Diagnostic, SourceSpan, Subject};
use crate::model::{
    is_valid_identifier, Assessment, AssessmentStatus, KpaDef, MaturityModel, ParameterBinding,
    ParameterCategory, ParameterDef, Score, ScoreLevel, SpecificGoalDef, Tier, MAX_IDENT_LEN,
};

/// File name used in spans when parsing text without a path.
pub const DEFAULT_FILE: &str = "<input>";

pub const MODEL_EXTENSION: &str = "smmdl";
pub const ASSESSMENT_EXTENSION: &str = "smma";

/// Source locations of parsed elements, keyed by the [`Subject`] that
/// validation diagnostics refer to.
#[derive(Debug, Clone, Default)]
pub struct SourceMap {
    spans: HashMap<Subject, SourceSpan>,
}

impl SourceMap {
    pub fn get(&self, subject: &Subject) -> Option<&SourceSpan> {
        self.spans.get(subject)
    }

    /// Fills in the location of every diagnostic whose subject was parsed
    /// from source and that has no location yet.
    pub fn attach(&self, diagnostics: &mut [Diagnostic]) {
        for d in diagnostics.iter_mut().filter(|d| d.location.is_none()) {
            if let Some(span) = d.subject.as_ref().and_then(|s| self.spans.get(s)) {
                d.location = Some(span.clone());
            }
        }
    }

    fn record(&mut self, subject: Subject, span: SourceSpan) {
        self.spans.entry(subject).or_insert(span);
    }
}

#[derive(Debug, Clone, PartialEq)]
enum TokenKind {
    Word(String),
    Str(String),
}

#[derive(Debug, Clone)]
struct Token {
    kind: TokenKind,
    column: usize,
}

impl Token {
    fn describe(&self) -> String {
        match &self.kind {
            TokenKind::Word(w) => format!("`{w}`"),
            TokenKind::Str(s) => format!("string {s:?}"),
        }
    }
}

/// Splits one line into tokens. Errors abort the line.
fn lex_line(line: &str, line_no: usize, file: &str) -> Result<(Vec<Token>, usize), Diagnostic> {
    let chars: Vec<char> = line.chars().collect();
    let span = |column: usize| SourceSpan {
        file: file.to_owned(),
        line: line_no,
        column,
    };
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            break;
        } else if c == '"' {
            let start = i;
            i += 1;
            let mut value = String::new();
            loop {
                match chars.get(i) {
                    None => {
                        return Err(Diagnostic::error(
                            codes::UNTERMINATED_STRING,
                            "string is not closed before the end of the line",
                        )
                        .at(span(start + 1)))
                    }
                    Some('"') => {
                        i += 1;
                        break;
                    }
                    Some('\\') => match chars.get(i + 1) {
                        Some(&e @ ('"' | '\\')) => {
                            value.push(e);
                            i += 2;
                        }
                        other => {
                            let shown = other.map(|c| c.to_string()).unwrap_or_default();
                            return Err(Diagnostic::error(
                                codes::BAD_ESCAPE,
                                format!("unsupported escape `\\{shown}`; only \\\" and \\\\ are allowed"),
                            )
                            .at(span(i + 1)));
                        }
                    },
                    Some(&c) => {
                        value.push(c);
                        i += 1;
                    }
                }
            }
            tokens.push(Token {
                kind: TokenKind::Str(value),
                column: start + 1,
            });
        } else {
            let start = i;
            while i < chars.len() && !chars[i].is_whitespace() && chars[i] != '"' && chars[i] != '#'
            {
                i += 1;
            }
            tokens.push(Token {
                kind: TokenKind::Word(chars[start..i].iter().collect()),
                column: start + 1,
            });
        }
    }
    Ok((tokens, chars.len() + 1))
}

/// Sequential access to the tokens of one declaration.
struct Line<'a> {
    tokens: Vec<Token>,
    pos: usize,
    line_no: usize,
    end_column: usize,
    file: &'a str,
}

impl<'a> Line<'a> {
    fn span_at(&self, column: usize) -> SourceSpan {
        SourceSpan {
            file: self.file.to_owned(),
            line: self.line_no,
            column,
        }
    }

    fn start(&self) -> SourceSpan {
        self.span_at(self.tokens.first().map_or(1, |t| t.column))
    }

    fn next_span(&self) -> SourceSpan {
        self.span_at(self.tokens.get(self.pos).map_or(self.end_column, |t| t.column))
    }

    fn missing(&self, what: &str) -> Diagnostic {
        let found = match self.tokens.get(self.pos) {
            Some(t) => t.describe(),
            None => "end of line".to_owned(),
        };
        Diagnostic::error(codes::SYNTAX, format!("expected {what}, found {found}"))
            .at(self.next_span())
    }

    fn word(&mut self, what: &str) -> Result<(String, SourceSpan), Diagnostic> {
        match self.tokens.get(self.pos) {
            Some(Token {
                kind: TokenKind::Word(w),
                column,
            }) => {
                let out = (w.clone(), self.span_at(*column));
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.missing(what)),
        }
    }

    fn string(&mut self, what: &str) -> Result<(String, SourceSpan), Diagnostic> {
        match self.tokens.get(self.pos) {
            Some(Token {
                kind: TokenKind::Str(s),
                column,
            }) => {
                let out = (s.clone(), self.span_at(*column));
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.missing(what)),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), Diagnostic> {
        match self.tokens.get(self.pos) {
            Some(Token {
                kind: TokenKind::Word(w),
                ..
            }) if w == kw => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.missing(&format!("`{kw}`"))),
        }
    }

    fn peek_keyword(&self, kw: &str) -> bool {
        matches!(self.tokens.get(self.pos), Some(Token { kind: TokenKind::Word(w), .. }) if w == kw)
    }

    fn ident(&mut self, what: &str) -> Result<(String, SourceSpan), Diagnostic> {
        let (id, span) = self.word(what)?;
        check_ident(&id, span.clone())?;
        Ok((id, span))
    }

    fn quoted_ident(&mut self, what: &str) -> Result<(String, SourceSpan), Diagnostic> {
        let (id, span) = self.string(what)?;
        check_ident(&id, span.clone())?;
        Ok((id, span))
    }

    fn finish(&self) -> Result<(), Diagnostic> {
        match self.tokens.get(self.pos) {
            None => Ok(()),
            Some(t) => Err(Diagnostic::error(
                codes::SYNTAX,
                format!("unexpected {} at end of declaration", t.describe()),
            )
            .at(self.span_at(t.column))),
        }
    }
}

fn check_ident(id: &str, span: SourceSpan) -> Result<(), Diagnostic> {
    if is_valid_identifier(id) {
        Ok(())
    } else {
        Err(Diagnostic::error(
            codes::BAD_IDENT,
            format!("invalid identifier {id:?}: use 1-{MAX_IDENT_LEN} ASCII letters, digits, '.', '_' or '-'"),
        )
        .at(span))
    }
}

/// Strict decimal: optional `-`, digits, optional fraction. No exponent,
/// no leading `+`, no bare `.`.
fn parse_decimal(s: &str) -> Option<f64> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    let (int, frac) = match digits.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (digits, None),
    };
    let all_digits = |p: &str| !p.is_empty() && p.bytes().all(|b| b.is_ascii_digit());
    if !all_digits(int) || frac.is_some_and(|f| !all_digits(f)) {
        return None;
    }
    s.parse().ok()
}

fn number(line: &mut Line<'_>, what: &str) -> Result<f64, Diagnostic> {
    let (raw, span) = line.word(what)?;
    parse_decimal(&raw).ok_or_else(|| {
        Diagnostic::error(codes::BAD_NUMBER, format!("malformed number `{raw}` for {what}")).at(span)
    })
}

fn version(line: &mut Line<'_>) -> Result<u32, Diagnostic> {
    let (raw, span) = line.word("version number")?;
    if !raw.bytes().all(|b| b.is_ascii_digit()) || raw.is_empty() {
        return Err(Diagnostic::error(
            codes::BAD_NUMBER,
            format!("malformed version `{raw}`, expected a positive integer"),
        )
        .at(span));
    }
    match raw.parse::<u32>() {
        Ok(0) => Err(Diagnostic::error(codes::BAD_VERSION, "version must be positive").at(span)),
        Ok(v) => Ok(v),
        Err(_) => Err(Diagnostic::error(codes::BAD_NUMBER, format!("version `{raw}` is too large")).at(span)),
    }
}

/// Iterates non-empty lexed lines; lexing errors are pushed to `errors`.
fn lines<'a>(
    text: &'a str,
    file: &'a str,
    errors: &mut Vec<Diagnostic>,
) -> Vec<Line<'a>> {
    let body = match text.strip_prefix('\u{feff}') {
        Some(rest) => {
            errors.push(
                Diagnostic::error(codes::BOM, "byte order mark is not allowed; save as UTF-8 without BOM")
                    .at(SourceSpan {
                        file: file.to_owned(),
                        line: 1,
                        column: 1,
                    }),
            );
            rest
        }
        None => text,
    };
    body.lines()
        .enumerate()
        .filter_map(|(i, raw)| match lex_line(raw, i + 1, file) {
            Ok((tokens, _)) if tokens.is_empty() => None,
            Ok((tokens, end_column)) => Some(Line {
                tokens,
                pos: 0,
                line_no: i + 1,
                end_column,
                file,
            }),
            Err(d) => {
                errors.push(d);
                None
            }
        })
        .collect()
}

pub fn parse_model(text: &str) -> Result<MaturityModel, Vec<Diagnostic>> {
    parse_model_source(text, DEFAULT_FILE).map(|(m, _)| m)
}

/// Where the current `goal`/`uses` lines attach.
#[derive(Clone, Copy, PartialEq)]
enum Scope {
    Top,
    Kpa,
    Goal,
    /// The enclosing declaration failed; nested lines are skipped quietly.
    Broken,
}

pub fn parse_model_source(
    text: &str,
    file: &str,
) -> Result<(MaturityModel, SourceMap), Vec<Diagnostic>> {
    let mut errors = Vec::new();
    let mut map = SourceMap::default();
    let mut header: Option<(String, String, u32)> = None;
    let mut parameters: Vec<ParameterDef> = Vec::new();
    let mut kpas: Vec<KpaDef> = Vec::new();
    let mut param_ids = HashSet::new();
    let mut kpa_ids = HashSet::new();
    let mut goal_ids = HashSet::new();
    let mut kpa_scope = Scope::Top;
    let mut goal_scope = Scope::Top;
    let mut saw_declaration = false;
    let mut header_attempted = false;

    let parsed = lines(text, file, &mut errors);
    let lex_failed = !errors.is_empty();

    for mut line in parsed {
        saw_declaration = true;
        let (keyword, kw_span) = match line.word("a keyword") {
            Ok(k) => k,
            Err(d) => {
                errors.push(d);
                continue;
            }
        };
        let result: Result<(), Diagnostic> = (|| match keyword.as_str() {
            "model" => {
                header_attempted = true;
                let (id, _) = line.ident("model id")?;
                let (name, _) = line.string("model name")?;
                line.keyword("version")?;
                let v = version(&mut line)?;
                line.finish()?;
                if header.is_some() {
                    return Err(Diagnostic::error(codes::DUP_HEADER, "model declared twice").at(kw_span.clone()));
                }
                map.record(Subject::Model, kw_span.clone());
                header = Some((id, name, v));
                Ok(())
            }
            "param" => {
                let (id, id_span) = line.ident("parameter id")?;
                let (description, _) = line.string("parameter description")?;
                line.keyword("category")?;
                let (cat, cat_span) = line.word("category")?;
                let category = ParameterCategory::from_keyword(&cat).ok_or_else(|| {
                    Diagnostic::error(
                        codes::UNKNOWN_CATEGORY,
                        format!("unknown category `{cat}`; expected process, estimation, product, team or technology"),
                    )
                    .at(cat_span)
                })?;
                let step_cost = if line.peek_keyword("cost") {
                    line.keyword("cost")?;
                    number(&mut line, "cost")?
                } else {
                    1.0
                };
                line.finish()?;
                if !param_ids.insert(id.clone()) {
                    return Err(Diagnostic::error(codes::DUP_PARAM, format!("parameter {id} declared twice")).at(id_span));
                }
                map.record(Subject::Parameter { id: id.clone() }, id_span);
                parameters.push(ParameterDef {
                    id,
                    description,
                    category,
                    step_cost,
                });
                Ok(())
            }
            "kpa" => {
                kpa_scope = Scope::Broken;
                goal_scope = Scope::Broken;
                let (id, id_span) = line.ident("KPA id")?;
                let (name, _) = line.string("KPA name")?;
                line.keyword("plm")?;
                let (plm_stage, _) = line.string("PLM stage")?;
                line.finish()?;
                if !kpa_ids.insert(id.clone()) {
                    return Err(Diagnostic::error(codes::DUP_KPA, format!("KPA {id} declared twice")).at(id_span));
                }
                map.record(Subject::Kpa { id: id.clone() }, id_span);
                kpas.push(KpaDef {
                    id,
                    name,
                    plm_stage,
                    goals: Vec::new(),
                });
                kpa_scope = Scope::Kpa;
                goal_scope = Scope::Top;
                Ok(())
            }
            "goal" => {
                match kpa_scope {
                    Scope::Broken => return Ok(()),
                    Scope::Top => {
                        goal_scope = Scope::Broken;
                        return Err(Diagnostic::error(codes::MISPLACED, "`goal` must follow a `kpa` declaration").at(kw_span.clone()));
                    }
                    _ => {}
                }
                goal_scope = Scope::Broken;
                let (id, id_span) = line.ident("goal id")?;
                let (name, _) = line.string("goal name")?;
                line.keyword("tier")?;
                let (tier_word, tier_span) = line.word("tier")?;
                let tier = Tier::from_keyword(&tier_word).ok_or_else(|| {
                    Diagnostic::error(
                        codes::UNKNOWN_TIER,
                        format!("unknown tier `{tier_word}`; expected basic or advanced"),
                    )
                    .at(tier_span)
                })?;
                line.finish()?;
                if !goal_ids.insert(id.clone()) {
                    return Err(Diagnostic::error(codes::DUP_GOAL, format!("goal {id} declared twice")).at(id_span));
                }
                map.record(Subject::Goal { id: id.clone() }, id_span);
                if let Some(kpa) = kpas.last_mut() {
                    kpa.goals.push(SpecificGoalDef {
                        id,
                        name,
                        tier,
                        bindings: Vec::new(),
                    });
                }
                goal_scope = Scope::Goal;
                Ok(())
            }
            "uses" => {
                match goal_scope {
                    Scope::Broken => return Ok(()),
                    Scope::Top | Scope::Kpa => {
                        return Err(Diagnostic::error(codes::MISPLACED, "`uses` must follow a `goal` declaration").at(kw_span.clone()));
                    }
                    Scope::Goal => {}
                }
                let (parameter_id, pid_span) = line.ident("parameter id")?;
                line.keyword("weight")?;
                let weight = number(&mut line, "weight")?;
                line.finish()?;
                let goal = kpas
                    .last_mut()
                    .and_then(|k| k.goals.last_mut())
                    .expect("goal scope implies a goal");
                if goal.bindings.iter().any(|b| b.parameter_id == parameter_id) {
                    return Err(Diagnostic::error(
                        codes::DUP_BINDING,
                        format!("goal {} uses parameter {parameter_id} twice", goal.id),
                    )
                    .at(pid_span));
                }
                map.record(
                    Subject::Binding {
                        goal: goal.id.clone(),
                        parameter: parameter_id.clone(),
                    },
                    pid_span,
                );
                goal.bindings.push(ParameterBinding {
                    parameter_id,
                    weight,
                });
                Ok(())
            }
            other => Err(Diagnostic::error(
                codes::UNKNOWN_KEYWORD,
                format!("unknown keyword `{other}`; expected model, param, kpa, goal or uses"),
            )
            .at(kw_span.clone())),
        })();
        if let Err(d) = result {
            errors.push(d);
        }
    }

    if !saw_declaration && errors.is_empty() {
        errors.push(
            Diagnostic::error(codes::EMPTY_MODEL, "model file contains no declarations").at(SourceSpan {
                file: file.to_owned(),
                line: 1,
                column: 1,
            }),
        );
    } else if !header_attempted && !lex_failed {
        errors.push(
            Diagnostic::error(codes::MISSING_HEADER, "missing `model <id> \"<name>\" version <int>` declaration")
                .at(SourceSpan {
                    file: file.to_owned(),
                    line: 1,
                    column: 1,
                }),
        );
    }

    if !errors.is_empty() {
        errors.sort_by_key(|d| d.location.as_ref().map(|l| (l.line, l.column)));
        return Err(errors);
    }
    let (id, name, version) = header.expect("checked above");
    Ok((
        MaturityModel {
            id,
            name,
            version,
            parameters,
            kpas,
        },
        map,
    ))
}

pub fn parse_assessment(text: &str) -> Result<Assessment, Vec<Diagnostic>> {
    parse_assessment_source(text, DEFAULT_FILE).map(|(a, _)| a)
}

struct AssessmentHeader {
    id: String,
    model_id: String,
    model_version: u32,
    team: String,
    date: NaiveDate,
}

fn parse_date(raw: &str, span: SourceSpan) -> Result<NaiveDate, Diagnostic> {
    let shape_ok = raw.len() == 10
        && raw.bytes().enumerate().all(|(i, b)| match i {
            4 | 7 => b == b'-',
            _ => b.is_ascii_digit(),
        });
    shape_ok
        .then(|| NaiveDate::parse_from_str(raw, "%Y-%m-%d").ok())
        .flatten()
        .ok_or_else(|| {
            Diagnostic::error(codes::BAD_DATE, format!("invalid date `{raw}`, expected YYYY-MM-DD")).at(span)
        })
}

fn status(line: &mut Line<'_>) -> Result<AssessmentStatus, Diagnostic> {
    let (raw, span) = line.word("status")?;
    raw.parse().map_err(|()| {
        Diagnostic::error(
            codes::UNKNOWN_STATUS,
            format!("unknown status `{raw}`; expected draft, reviewed or final"),
        )
        .at(span)
    })
}

pub fn parse_assessment_source(
    text: &str,
    file: &str,
) -> Result<(Assessment, SourceMap), Vec<Diagnostic>> {
    let mut errors = Vec::new();
    let mut map = SourceMap::default();
    let mut header: Option<AssessmentHeader> = None;
    let mut header_failed = false;
    let mut status_value: Option<AssessmentStatus> = None;
    let mut scores: BTreeMap<String, Score> = BTreeMap::new();

    let parsed = lines(text, file, &mut errors);
    let lex_failed = !errors.is_empty();
    let empty = parsed.is_empty();

    for mut line in parsed {
        let (keyword, kw_span) = match line.word("a keyword") {
            Ok(k) => k,
            Err(d) => {
                errors.push(d);
                continue;
            }
        };
        let result: Result<(), Diagnostic> = (|| match keyword.as_str() {
            "assessment" => {
                if header.is_some() || header_failed {
                    return Err(Diagnostic::error(codes::DUP_HEADER, "assessment declared twice").at(kw_span.clone()));
                }
                header_failed = true;
                let (id, _) = line.quoted_ident("assessment id")?;
                line.keyword("model")?;
                let (model_id, _) = line.quoted_ident("model id")?;
                line.keyword("version")?;
                let model_version = version(&mut line)?;
                line.keyword("team")?;
                let (team, _) = line.string("team name")?;
                line.keyword("date")?;
                let (raw_date, date_span) = line.word("date")?;
                let date = parse_date(&raw_date, date_span)?;
                if line.peek_keyword("status") {
                    let status_span = line.next_span();
                    line.keyword("status")?;
                    let s = status(&mut line)?;
                    if status_value.replace(s).is_some() {
                        return Err(Diagnostic::error(codes::DUP_HEADER, "status given twice").at(status_span));
                    }
                }
                line.finish()?;
                map.record(Subject::Assessment, line.start());
                header_failed = false;
                header = Some(AssessmentHeader {
                    id,
                    model_id,
                    model_version,
                    team,
                    date,
                });
                Ok(())
            }
            "status" => {
                let s = status(&mut line)?;
                line.finish()?;
                if status_value.replace(s).is_some() {
                    return Err(Diagnostic::error(codes::DUP_HEADER, "status given twice").at(kw_span.clone()));
                }
                Ok(())
            }
            "score" => {
                let (id, id_span) = line.ident("parameter id")?;
                let (raw, level_span) = line.word("score level")?;
                let level = match raw.as_str() {
                    "0" => ScoreLevel::NotAvailable,
                    "1" => ScoreLevel::Implicit,
                    "2" => ScoreLevel::Explicit,
                    _ if parse_decimal(&raw).is_some() => {
                        return Err(Diagnostic::error(
                            codes::SCORE_RANGE,
                            format!("score `{raw}` is out of range; levels are 0, 1 or 2"),
                        )
                        .at(level_span))
                    }
                    _ => {
                        return Err(Diagnostic::error(codes::BAD_NUMBER, format!("malformed score `{raw}`"))
                            .at(level_span))
                    }
                };
                let note = if line.peek_keyword("note") {
                    line.keyword("note")?;
                    Some(line.string("note text")?.0)
                } else {
                    None
                };
                line.finish()?;
                if scores.contains_key(&id) {
                    return Err(Diagnostic::error(codes::DUP_SCORE, format!("parameter {id} scored twice")).at(id_span));
                }
                map.record(Subject::Score { parameter: id.clone() }, id_span);
                scores.insert(id, Score { level, note });
                Ok(())
            }
            other => Err(Diagnostic::error(
                codes::UNKNOWN_KEYWORD,
                format!("unknown keyword `{other}`; expected assessment, status or score"),
            )
            .at(kw_span.clone())),
        })();
        if let Err(d) = result {
            errors.push(d);
        }
    }

    let origin = SourceSpan {
        file: file.to_owned(),
        line: 1,
        column: 1,
    };
    if empty && errors.is_empty() {
        errors.push(Diagnostic::error(codes::EMPTY_ASSESSMENT, "assessment file contains no declarations").at(origin));
    } else if header.is_none() && !header_failed && !lex_failed {
        errors.push(
            Diagnostic::error(codes::MISSING_HEADER, "missing `assessment \"<id>\" model ...` declaration").at(origin),
        );
    }

    if !errors.is_empty() {
        errors.sort_by_key(|d| d.location.as_ref().map(|l| (l.line, l.column)));
        return Err(errors);
    }
    let h = header.expect("checked above");
    Ok((
        Assessment {
            id: h.id,
            model_id: h.model_id,
            model_version: h.model_version,
            date: h.date,
            team: h.team,
            status: status_value.unwrap_or_default(),
            scores,
        },
        map,
    ))
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        if matches!(c, '"' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('"');
    out
}

/// Canonical model text: header and parameter pool first, then one block per
/// KPA preceded by a blank line, two-space indentation per nesting level.
pub fn serialize_model(model: &MaturityModel) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "model {} {} version {}",
        model.id,
        quote(&model.name),
        model.version
    );
    for p in &model.parameters {
        let _ = write!(
            out,
            "param {} {} category {}",
            p.id,
            quote(&p.description),
            p.category.keyword()
        );
        if p.step_cost != 1.0 {
            let _ = write!(out, " cost {}", p.step_cost);
        }
        out.push('\n');
    }
    for kpa in &model.kpas {
        let _ = writeln!(
            out,
            "\nkpa {} {} plm {}",
            kpa.id,
            quote(&kpa.name),
            quote(&kpa.plm_stage)
        );
        for goal in &kpa.goals {
            let _ = writeln!(
                out,
                "  goal {} {} tier {}",
                goal.id,
                quote(&goal.name),
                goal.tier.keyword()
            );
            for b in &goal.bindings {
                let _ = writeln!(out, "    uses {} weight {}", b.parameter_id, b.weight);
            }
        }
    }
    out
}

/// Canonical assessment text with scores in lexicographic parameter order.
pub fn serialize_assessment(assessment: &Assessment) -> String {
    write_assessment(assessment, assessment.scores.iter().collect())
}

/// Canonical assessment text with scores in the model's pool order; scores
/// for parameters outside the pool follow lexicographically.
pub fn serialize_assessment_for(assessment: &Assessment, model: &MaturityModel) -> String {
    let index = model.pool_index();
    let mut scores: Vec<_> = assessment.scores.iter().collect();
    scores.sort_by_key(|(id, _)| (index.get(id.as_str()).copied().unwrap_or(usize::MAX), id.as_str()));
    write_assessment(assessment, scores)
}

fn write_assessment(a: &Assessment, scores: Vec<(&String, &Score)>) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "assessment {} model {} version {} team {} date {}",
        quote(&a.id),
        quote(&a.model_id),
        a.model_version,
        quote(&a.team),
        a.date.format("%Y-%m-%d")
    );
    let _ = writeln!(out, "status {}", a.status.keyword());
    for (id, score) in scores {
        let _ = write!(out, "score {id} {}", score.level);
        if let Some(note) = &score.note {
            let _ = write!(out, " note {}", quote(note));
        }
        out.push('\n');
    }
    out
}
