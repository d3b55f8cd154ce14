//! HTTP API over a file-backed store of maturity models and assessments.
//!
//! | method | path | |
//! |---|---|---|
//! | GET | `/api/models` | list ids and revisions |
//! | GET, PUT, DELETE | `/api/models/{id}` | |
//! | GET | `/api/assessments` | |
//! | GET, PUT, DELETE | `/api/assessments/{id}` | |
//! | PATCH | `/api/assessments/{id}/scores` | partial score update |
//! | GET | `/api/assessments/{id}/evaluation?method=` | |
//! | POST | `/api/assessments/{id}/what-if` | never persisted |
//! | POST | `/api/assessments/{id}/plan` | |
//!
//! Writes carry the expected revision in `If-Match` (`0` creates); reads
//! return the current one in `ETag`. Errors are [`ErrorBody`] documents.

mod error;
mod handlers;

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::extract::DefaultBodyLimit;
use axum::routing::{get, post};
use axum::Router;
use thiserror::Error;

use smm_core::planner::DEFAULT_EXHAUSTIVE_THRESHOLD;
use smm_core::store::{Store, StoreError};

pub use error::{ApiError, ErrorBody};
pub use handlers::{PlanRequest, ScorePatch, WhatIfRequest};

pub const DEFAULT_BODY_LIMIT: usize = 1 << 20;

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub bind: SocketAddr,
    pub store_root: PathBuf,
    pub exhaustive_threshold: usize,
    pub body_limit: usize,
}

impl ServiceConfig {
    pub fn new(store_root: impl Into<PathBuf>) -> Self {
        ServiceConfig {
            bind: SocketAddr::from(([127, 0, 0, 1], 8080)),
            store_root: store_root.into(),
            exhaustive_threshold: DEFAULT_EXHAUSTIVE_THRESHOLD,
            body_limit: DEFAULT_BODY_LIMIT,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AppState {
    pub store: Arc<Store>,
    pub exhaustive_threshold: usize,
}

pub fn router(state: AppState, body_limit: usize) -> Router {
    use handlers::*;
    Router::new()
        .route("/api/models", get(list_models))
        .route("/api/models/{id}", get(get_model).put(put_model).delete(delete_model))
        .route("/api/assessments", get(list_assessments))
        .route(
            "/api/assessments/{id}",
            get(get_assessment).put(put_assessment).delete(delete_assessment),
        )
        .route("/api/assessments/{id}/scores", axum::routing::patch(patch_scores))
        .route("/api/assessments/{id}/evaluation", get(evaluation))
        .route("/api/assessments/{id}/what-if", post(what_if))
        .route("/api/assessments/{id}/plan", post(plan))
        .layer(DefaultBodyLimit::max(body_limit))
        .with_state(state)
}

/// Opens the store named by `config` and builds the router.
pub fn app(config: &ServiceConfig) -> Result<Router, StoreError> {
    let state = AppState {
        store: Arc::new(Store::open(&config.store_root)?),
        exhaustive_threshold: config.exhaustive_threshold,
    };
    Ok(router(state, config.body_limit))
}

#[derive(Debug, Error)]
pub enum ServeError {
    #[error("cannot open store: {0}")]
    Store(#[from] StoreError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Serves until Ctrl-C.
pub async fn serve(config: ServiceConfig) -> Result<(), ServeError> {
    let app = app(&config)?;
    let listener = tokio::net::TcpListener::bind(config.bind).await?;
    tracing::info!(
        addr = %listener.local_addr()?,
        store = %config.store_root.display(),
        "listening"
    );
    axum::serve(listener, app)
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
