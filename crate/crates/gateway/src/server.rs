//! HTTP wire API over a single draft.
//!
//! Readers get the last published snapshot; mutations go through one
//! writer lock and publish a fresh snapshot when they succeed.

use std::net::SocketAddr;
use std::sync::{Arc, Mutex, RwLock};

use axum::extract::{Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use confsched_core::corpus::{PaperId, PersonId, SessionId};
use confsched_core::recommend::recommend;
use serde::Deserialize;
use serde_json::json;

use crate::draft::{self, Draft, Inputs, Mutation, MutationError, Published};

pub struct AppState {
    inputs: Arc<Inputs>,
    writer: Mutex<Draft>,
    published: RwLock<Arc<Published>>,
}

impl AppState {
    pub fn new(draft: Draft) -> Arc<Self> {
        let published = Arc::new(draft.publish());
        Arc::new(AppState {
            inputs: Arc::clone(draft.inputs()),
            writer: Mutex::new(draft),
            published: RwLock::new(published),
        })
    }

    pub fn current(&self) -> Arc<Published> {
        Arc::clone(&self.published.read().expect("published lock poisoned"))
    }

    /// Serialized through the writer; the new snapshot is published before
    /// the writer lock is released so readers never see a revision whose
    /// view is missing.
    pub fn mutate(&self, m: &Mutation) -> Result<draft::MutationOutcome, MutationError> {
        let mut writer = self.writer.lock().expect("writer lock poisoned");
        let outcome = writer.apply(m)?;
        *self.published.write().expect("published lock poisoned") = Arc::new(writer.publish());
        Ok(outcome)
    }
}

fn error(status: StatusCode, message: impl Into<String>) -> Response {
    (status, Json(json!({ "error": message.into() }))).into_response()
}

async fn view(State(state): State<Arc<AppState>>) -> Response {
    Json(state.current().view.clone()).into_response()
}

async fn mutate(State(state): State<Arc<AppState>>, Json(m): Json<Mutation>) -> Response {
    // Reoptimize can take a while; keep it off the async workers.
    let result = tokio::task::spawn_blocking(move || state.mutate(&m)).await;
    match result {
        Ok(Ok(outcome)) => Json(outcome).into_response(),
        Ok(Err(MutationError::RevisionConflict { expected, current })) => (
            StatusCode::CONFLICT,
            Json(json!({
                "error": "revision conflict",
                "expected_revision": expected,
                "current_revision": current,
            })),
        )
            .into_response(),
        Ok(Err(e @ MutationError::Persist(_))) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
        Ok(Err(e)) => error(StatusCode::UNPROCESSABLE_ENTITY, e.to_string()),
        Err(e) => error(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()),
    }
}

#[derive(Deserialize)]
struct WhatIf {
    paper: PaperId,
    target: SessionId,
}

async fn whatif(State(state): State<Arc<AppState>>, Query(q): Query<WhatIf>) -> Response {
    let published = state.current();
    match draft::whatif(&state.inputs, &published.content, &q.paper, &q.target) {
        Ok(delta) => Json(json!({ "revision": published.view.revision, "delta": delta })).into_response(),
        Err(e) => error(StatusCode::NOT_FOUND, e.to_string()),
    }
}

fn default_k() -> usize {
    10
}

#[derive(Deserialize)]
struct RecommendQuery {
    person: PersonId,
    #[serde(default = "default_k")]
    k: usize,
}

async fn recommendations(State(state): State<Arc<AppState>>, Query(q): Query<RecommendQuery>) -> Response {
    match recommend(&state.inputs.ratings, &state.inputs.tfidf, &q.person, q.k) {
        Ok(recs) => Json(recs).into_response(),
        Err(e) => error(StatusCode::BAD_REQUEST, e.to_string()),
    }
}

async fn compare(State(state): State<Arc<AppState>>) -> Response {
    Json(state.inputs.comparison.clone()).into_response()
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/view", get(view))
        .route("/mutate", post(mutate))
        .route("/whatif", get(whatif))
        .route("/recommend", get(recommendations))
        .route("/compare", get(compare))
        .with_state(state)
}

pub async fn serve(state: Arc<AppState>, addr: SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    log::info!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(state)).await
}
