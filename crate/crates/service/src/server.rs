//! HTTP routes.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | POST | `/api/v1/rotor/validate` | rotor document | `{mass, diagnostics}` |
//! | POST | `/api/v1/compute` | compute request | compute response |
//! | POST | `/api/v1/sweep` | compute request with `sweep` | NDJSON stream of sweep events |
//! | GET | `/api/v1/models` | | model entries |
//! | GET | `/healthz` | | `{status, version, model_digest}` |
//!
//! Errors are `{code, message, path?}` with 400 (malformed body), 422
//! (invalid design), 404 (no model), 504 (timeout) or 500.

use std::convert::Infallible;
use std::sync::Arc;
use std::time::Instant;

use axum::body::{Body, Bytes};
use axum::extract::State;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures_util::stream;
use serde::{Deserialize, Serialize};
use tokio::sync::mpsc;

use crate::api::{parse_body, validate_request, validate_rotor, ApiError, ComputeRequest, Engine, ErrorKind, SweepEvent};
use crate::config::Config;
use crate::registry::{ModelEntry, ModelRegistry};

pub const NDJSON: &str = "application/x-ndjson";

pub struct AppState {
    pub engine: Engine,
    pub models: Vec<ModelEntry>,
    pub model_digest: Option<String>,
}

impl AppState {
    pub fn new(config: Config) -> Result<Self, Box<dyn std::error::Error + Send + Sync>> {
        let fluids = config.fluid_registry()?;
        let registry = ModelRegistry::scan(config.model_dir.as_deref(), config.model.as_deref())?;
        let model_digest = registry.loaded_entry().map(|e| e.digest.clone());
        Ok(Self {
            engine: Engine { config, fluids, model: registry.loaded },
            models: registry.entries,
            model_digest,
        })
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = StatusCode::from_u16(self.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR);
        (status, Json(self.body)).into_response()
    }
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/v1/rotor/validate", post(validate))
        .route("/api/v1/compute", post(compute))
        .route("/api/v1/sweep", post(sweep))
        .route("/api/v1/models", get(models))
        .route("/healthz", get(healthz))
        .with_state(state)
}

async fn validate(body: Bytes) -> Result<Response, ApiError> {
    let doc: serde_json::Value = parse_body(&body)?;
    let (_, resp) = validate_rotor(&doc)?;
    Ok(Json(resp).into_response())
}

fn join_error(e: tokio::task::JoinError) -> ApiError {
    ApiError::new(ErrorKind::Internal, "internal", e.to_string(), None)
}

fn timeout_error() -> ApiError {
    ApiError::new(ErrorKind::Timeout, "timeout", "request exceeded the configured time limit", None)
}

async fn compute(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: ComputeRequest = parse_body(&body)?;
    let design = validate_request(&req, &state.engine.fluids)?;
    state.engine.check_evaluator(req.evaluator)?;
    let limit = state.engine.config.timeout();
    let task = {
        let state = state.clone();
        tokio::task::spawn_blocking(move || state.engine.compute(&design, req.evaluator))
    };
    let resp = tokio::time::timeout(limit, task).await.map_err(|_| timeout_error())?.map_err(join_error)??;
    Ok(Json(resp).into_response())
}

async fn sweep(State(state): State<Arc<AppState>>, body: Bytes) -> Result<Response, ApiError> {
    let req: ComputeRequest = parse_body(&body)?;
    let design = validate_request(&req, &state.engine.fluids)?;
    state.engine.check_evaluator(req.evaluator)?;
    let sweep_req = req.sweep.as_ref().ok_or_else(|| {
        ApiError::new(ErrorKind::Validation, "sweep.missing", "request has no sweep section", Some("sweep".into()))
    })?;
    let spec = state.engine.sweep_spec(&design, req.evaluator, sweep_req)?;
    let deadline = Instant::now() + state.engine.config.timeout();

    let (tx, rx) = mpsc::unbounded_channel::<SweepEvent>();
    tokio::task::spawn_blocking(move || {
        let progress = |done, total| {
            let _ = tx.send(SweepEvent::Progress { done, total });
        };
        let event = match state.engine.sweep(&design, &spec, deadline, progress) {
            Ok(outcome) => SweepEvent::Result(Box::new(outcome)),
            Err(e) => SweepEvent::Error(e.body),
        };
        let _ = tx.send(event);
    });
    let lines = stream::unfold(rx, |mut rx| async move {
        let event = rx.recv().await?;
        let mut line = serde_json::to_vec(&event).expect("events serialise");
        line.push(b'\n');
        Some((Ok::<_, Infallible>(Bytes::from(line)), rx))
    });
    Ok(([(header::CONTENT_TYPE, NDJSON)], Body::from_stream(lines)).into_response())
}

async fn models(State(state): State<Arc<AppState>>) -> Json<Vec<ModelEntry>> {
    Json(state.models.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Health {
    pub status: String,
    pub version: String,
    pub model_digest: Option<String>,
}

async fn healthz(State(state): State<Arc<AppState>>) -> Json<Health> {
    Json(Health { status: "ok".into(), version: env!("CARGO_PKG_VERSION").into(), model_digest: state.model_digest.clone() })
}

pub async fn serve(state: Arc<AppState>) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(&state.engine.config.bind).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
