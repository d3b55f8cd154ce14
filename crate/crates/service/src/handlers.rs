use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::header::{CONTENT_TYPE, ETAG, IF_MATCH};
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use serde::{Deserialize, Serialize};

use smm_core::diagnostic::codes;
use smm_core::planner::{self, PlanOptions};
use smm_core::report::render_json;
use smm_core::store::{EntityInfo, Store, Versioned};
use smm_core::{
    evaluate, Assessment, Diagnostic, MaturityLevel, MaturityModel, Method, PlanMethod, Score,
    ScoreLevel, Subject,
};

use crate::{ApiError, AppState};

type ApiResult<T> = Result<T, ApiError>;

/// Runs blocking store or planner work off the async executor.
async fn blocking<T, F>(f: F) -> ApiResult<T>
where
    T: Send + 'static,
    F: FnOnce() -> ApiResult<T> + Send + 'static,
{
    tokio::task::spawn_blocking(f)
        .await
        .map_err(|e| ApiError::internal(e.to_string()))?
}

fn etag(revision: u64) -> HeaderValue {
    HeaderValue::from_str(&format!("\"{revision}\"")).expect("digits are a valid header")
}

/// `If-Match` as a revision: `3`, `"3"` and `W/"3"` are all accepted.
fn if_match(headers: &HeaderMap) -> ApiResult<Option<u64>> {
    let Some(value) = headers.get(IF_MATCH) else {
        return Ok(None);
    };
    let text = value
        .to_str()
        .ok()
        .map(|s| s.trim().trim_start_matches("W/").trim_matches('"'));
    text.and_then(|s| s.parse().ok())
        .map(Some)
        .ok_or_else(|| ApiError::bad_request(codes::BAD_REVISION, "If-Match must carry a numeric revision"))
}

fn required_revision(headers: &HeaderMap) -> ApiResult<u64> {
    if_match(headers)?.ok_or_else(|| {
        ApiError::new(
            StatusCode::PRECONDITION_REQUIRED,
            codes::REVISION_REQUIRED,
            "If-Match header with the expected revision is required (0 to create)",
        )
    })
}

fn versioned<T: Serialize>(v: Versioned<T>) -> Response {
    ([(ETAG, etag(v.revision))], Json(v.value)).into_response()
}

fn written(id: String, revision: u64, created: bool) -> Response {
    let status = if created { StatusCode::CREATED } else { StatusCode::OK };
    (status, [(ETAG, etag(revision))], Json(EntityInfo { id, revision })).into_response()
}

fn json_text(body: String) -> Response {
    ([(CONTENT_TYPE, HeaderValue::from_static("application/json"))], body).into_response()
}

fn check_id(path_id: &str, body_id: &str) -> ApiResult<()> {
    if path_id == body_id {
        Ok(())
    } else {
        Err(ApiError::bad_request(
            codes::ID_MISMATCH,
            format!("path id {path_id} differs from body id {body_id}"),
        ))
    }
}

/// A JSON score level; anything but the integers 0, 1 and 2 is a
/// SCORE_RANGE error rather than a malformed body.
fn score_level(parameter: &str, n: &serde_json::Number) -> Result<ScoreLevel, Diagnostic> {
    n.as_u64()
        .and_then(|v| u8::try_from(v).ok())
        .and_then(ScoreLevel::from_value)
        .ok_or_else(|| {
            Diagnostic::error(
                codes::SCORE_RANGE,
                format!("score {n} for {parameter} is not one of 0, 1, 2"),
            )
            .about(Subject::Score {
                parameter: parameter.to_owned(),
            })
        })
}

fn score_levels(raw: &BTreeMap<String, serde_json::Number>) -> ApiResult<BTreeMap<String, ScoreLevel>> {
    let mut out = BTreeMap::new();
    let mut errors = Vec::new();
    for (id, n) in raw {
        match score_level(id, n) {
            Ok(level) => {
                out.insert(id.clone(), level);
            }
            Err(d) => errors.push(d),
        }
    }
    if errors.is_empty() {
        Ok(out)
    } else {
        Err(ApiError::unprocessable(codes::SCORE_RANGE, "score levels must be 0, 1 or 2").with_diagnostics(errors))
    }
}

fn load_pair(store: &Store, id: &str) -> ApiResult<(Versioned<Assessment>, MaturityModel)> {
    let assessment = store.get_assessment(id)?;
    let model = store.get_model(&assessment.value.model_id)?.value;
    Ok((assessment, model))
}

// models

pub async fn list_models(State(s): State<AppState>) -> ApiResult<Json<Vec<EntityInfo>>> {
    blocking(move || Ok(Json(s.store.list_models()?))).await
}

pub async fn get_model(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    blocking(move || Ok(versioned(s.store.get_model(&id)?))).await
}

pub async fn put_model(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<MaturityModel>, JsonRejection>,
) -> ApiResult<Response> {
    let expected = required_revision(&headers)?;
    let Json(model) = body?;
    check_id(&id, &model.id)?;
    blocking(move || {
        let revision = s.store.put_model(&model, expected)?;
        Ok(written(id, revision, expected == 0))
    })
    .await
}

pub async fn delete_model(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<StatusCode> {
    let expected = if_match(&headers)?;
    blocking(move || {
        s.store.delete_model(&id, expected)?;
        Ok(StatusCode::NO_CONTENT)
    })
    .await
}

// assessments

pub async fn list_assessments(State(s): State<AppState>) -> ApiResult<Json<Vec<EntityInfo>>> {
    blocking(move || Ok(Json(s.store.list_assessments()?))).await
}

pub async fn get_assessment(State(s): State<AppState>, Path(id): Path<String>) -> ApiResult<Response> {
    blocking(move || Ok(versioned(s.store.get_assessment(&id)?))).await
}

pub async fn put_assessment(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<Assessment>, JsonRejection>,
) -> ApiResult<Response> {
    let expected = required_revision(&headers)?;
    let Json(assessment) = body?;
    check_id(&id, &assessment.id)?;
    blocking(move || {
        let revision = s.store.put_assessment(&assessment, expected)?;
        Ok(written(id, revision, expected == 0))
    })
    .await
}

pub async fn delete_assessment(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
) -> ApiResult<StatusCode> {
    let expected = if_match(&headers)?;
    blocking(move || {
        s.store.delete_assessment(&id, expected)?;
        Ok(StatusCode::NO_CONTENT)
    })
    .await
}

/// New level and optional note for one parameter. In a PATCH body a `null`
/// entry removes the score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScorePatch {
    pub level: serde_json::Number,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

pub async fn patch_scores(
    State(s): State<AppState>,
    Path(id): Path<String>,
    headers: HeaderMap,
    body: Result<Json<BTreeMap<String, Option<ScorePatch>>>, JsonRejection>,
) -> ApiResult<Response> {
    let expected = if_match(&headers)?;
    let Json(patch) = body?;
    let mut updates = BTreeMap::new();
    let mut errors = Vec::new();
    for (param, entry) in patch {
        match entry {
            None => {
                updates.insert(param, None);
            }
            Some(p) => match score_level(&param, &p.level) {
                Ok(level) => {
                    updates.insert(param, Some(Score { level, note: p.note }));
                }
                Err(d) => errors.push(d),
            },
        }
    }
    if !errors.is_empty() {
        return Err(ApiError::unprocessable(codes::SCORE_RANGE, "score levels must be 0, 1 or 2")
            .with_diagnostics(errors));
    }
    blocking(move || {
        let current = s.store.get_assessment(&id)?;
        let base = expected.unwrap_or(current.revision);
        let mut assessment = current.value;
        for (param, score) in updates {
            match score {
                Some(score) => assessment.scores.insert(param, score),
                None => assessment.scores.remove(&param),
            };
        }
        let revision = s.store.put_assessment(&assessment, base)?;
        Ok(written(id, revision, false))
    })
    .await
}

// evaluation

#[derive(Debug, Deserialize)]
pub struct MethodQuery {
    method: Option<String>,
}

fn parse_method(raw: Option<&str>) -> ApiResult<Method> {
    raw.map_or(Ok(Method::Both), |m| {
        m.parse()
            .map_err(|e: String| ApiError::bad_request(codes::BAD_QUERY, e))
    })
}

pub async fn evaluation(
    State(s): State<AppState>,
    Path(id): Path<String>,
    query: Result<Query<MethodQuery>, QueryRejection>,
) -> ApiResult<Response> {
    let Query(query) = query?;
    let method = parse_method(query.method.as_deref())?;
    blocking(move || {
        let (assessment, model) = load_pair(&s.store, &id)?;
        let result = evaluate(&model, &assessment.value)?.for_method(method);
        Ok(json_text(render_json(&result)))
    })
    .await
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WhatIfRequest {
    #[serde(default)]
    pub overrides: BTreeMap<String, serde_json::Number>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

pub async fn what_if(
    State(s): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<WhatIfRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(req) = body?;
    let method = parse_method(req.method.as_deref())?;
    let overrides = score_levels(&req.overrides)?;
    blocking(move || {
        let (assessment, model) = load_pair(&s.store, &id)?;
        let result = planner::what_if(&model, &assessment.value, &overrides)?.for_method(method);
        Ok(json_text(render_json(&result)))
    })
    .await
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub kpa_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
    pub target: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadline_ms: Option<u64>,
}

pub async fn plan(
    State(s): State<AppState>,
    Path(id): Path<String>,
    body: Result<Json<PlanRequest>, JsonRejection>,
) -> ApiResult<Response> {
    let Json(req) = body?;
    let method: PlanMethod = match req.method.as_deref() {
        None => PlanMethod::Compensatory,
        Some(m) => m
            .parse()
            .map_err(|e: String| ApiError::bad_request(codes::MALFORMED_BODY, e))?,
    };
    let target: MaturityLevel = req
        .target
        .parse()
        .map_err(|e: String| ApiError::bad_request(codes::MALFORMED_BODY, e))?;
    let options = PlanOptions {
        exhaustive_threshold: s.exhaustive_threshold,
        deadline: req.deadline_ms.map(|ms| Instant::now() + Duration::from_millis(ms)),
    };
    blocking(move || {
        let (assessment, model) = load_pair(&s.store, &id)?;
        let plan = planner::plan(&model, &assessment.value, &req.kpa_id, method, target, &options)?;
        Ok(Json(plan).into_response())
    })
    .await
}
