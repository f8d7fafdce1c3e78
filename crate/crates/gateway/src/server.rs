//! HTTP query service.
//!
//! Read-only data plane at serve time: the index never changes while the
//! service runs, only the trust store does. Same-user requests serialize
//! on the per-user trust lock inside the orchestrator; different users
//! proceed concurrently on the blocking pool.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;

use ragward_control::{DecisionLog, Orchestrator, TrustRecord};
use ragward_core::Query;
use ragward_redteam::SeedSplitter;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Deserialize)]
pub struct QueryRequest {
    pub user_id: String,
    pub text: String,
    #[serde(default)]
    pub timestamp: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct QueryResponse {
    pub answer: String,
    pub masked: bool,
    /// Structured orchestration record; carries chunk references and
    /// metric values, never document text.
    pub decision_log: DecisionLog,
    pub latency_ms: u64,
}

pub struct AppState {
    /// Present once an index snapshot has been loaded.
    pub orchestrator: Option<Arc<Orchestrator>>,
    pub index_size: usize,
    seeds: SeedSplitter,
    counter: AtomicU64,
}

impl AppState {
    pub fn ready(orchestrator: Arc<Orchestrator>, master_seed: u64) -> Self {
        let index_size = orchestrator.engine.index().len();
        Self {
            orchestrator: Some(orchestrator),
            index_size,
            seeds: SeedSplitter::new(master_seed),
            counter: AtomicU64::new(0),
        }
    }

    pub fn unready(master_seed: u64) -> Self {
        Self {
            orchestrator: None,
            index_size: 0,
            seeds: SeedSplitter::new(master_seed),
            counter: AtomicU64::new(0),
        }
    }
}

pub fn build_router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/query", post(query))
        .route("/trust/{user_id}", get(trust))
        .with_state(state)
}

fn service_unavailable() -> Response {
    (StatusCode::SERVICE_UNAVAILABLE, Json(json!({"error": "index not ready"}))).into_response()
}

async fn health(State(state): State<Arc<AppState>>) -> Response {
    match &state.orchestrator {
        Some(_) => (
            StatusCode::OK,
            Json(json!({"version": VERSION, "index_size": state.index_size})),
        )
            .into_response(),
        None => service_unavailable(),
    }
}

async fn query(State(state): State<Arc<AppState>>, body: String) -> Response {
    let Some(orchestrator) = state.orchestrator.clone() else {
        return service_unavailable();
    };
    let request: QueryRequest = match serde_json::from_str(&body) {
        Ok(request) => request,
        Err(e) => {
            return (StatusCode::BAD_REQUEST, Json(json!({"error": e.to_string()})))
                .into_response()
        }
    };
    if request.user_id.is_empty() || request.text.is_empty() {
        return (
            StatusCode::BAD_REQUEST,
            Json(json!({"error": "user_id and text must be non-empty"})),
        )
            .into_response();
    }

    let timestamp = request.timestamp.unwrap_or_else(|| {
        std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs_f64())
            .unwrap_or(0.0)
    });
    let query = Query::new(request.user_id, request.text, timestamp);
    let dp_seed = state.seeds.derive("dp-noise", state.counter.fetch_add(1, Ordering::Relaxed));

    let started = Instant::now();
    let result =
        tokio::task::spawn_blocking(move || orchestrator.orchestrate_query(&query, dp_seed)).await;
    match result {
        Ok(Ok(out)) => {
            let response = QueryResponse {
                answer: out.answer.text,
                masked: out.answer.masked,
                decision_log: out.log,
                latency_ms: started.elapsed().as_millis() as u64,
            };
            (StatusCode::OK, Json(response)).into_response()
        }
        Ok(Err(e)) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(json!({"error": e.to_string()})),
        )
            .into_response(),
        Err(e) => (
            StatusCode::INTERNAL_SERVER_ERROR,
            Json(json!({"error": format!("worker failed: {e}")})),
        )
            .into_response(),
    }
}

async fn trust(State(state): State<Arc<AppState>>, Path(user_id): Path<String>) -> Response {
    let Some(orchestrator) = &state.orchestrator else {
        return service_unavailable();
    };
    match orchestrator.trust.get(&user_id) {
        Some(record) => (StatusCode::OK, Json::<TrustRecord>(record)).into_response(),
        None => (
            StatusCode::NOT_FOUND,
            Json(json!({"error": format!("unknown user {user_id}")})),
        )
            .into_response(),
    }
}
