//! JSON API over the task store.

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

use super::store::{task_from_prediction, Store};
use crate::analyzer::Analyzer;
use crate::error::Error;
use crate::learning::{format_labels, parse_predictions, select_uncertain};

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub min_entropy: f64,
    pub top: usize,
    /// Directory with the built UI bundle.
    pub static_dir: Option<PathBuf>,
}

impl Default for ServerConfig {
    fn default() -> Self {
        ServerConfig {
            min_entropy: 1.0,
            top: 10000,
            static_dir: None,
        }
    }
}

#[derive(Clone)]
pub struct AppState {
    pub store: Arc<Mutex<Store>>,
    pub analyzer: Arc<Analyzer>,
    pub config: Arc<ServerConfig>,
}

impl AppState {
    pub fn new(store: Store, analyzer: Analyzer, config: ServerConfig) -> AppState {
        AppState {
            store: Arc::new(Mutex::new(store)),
            analyzer: Arc::new(analyzer),
            config: Arc::new(config),
        }
    }
}

pub fn router(state: AppState) -> Router {
    let api = Router::new()
        .route("/api/task/next", get(next_task))
        .route("/api/task/{word}/label", post(label))
        .route("/api/stats", get(stats))
        .route("/api/export", get(export))
        .route("/api/queue/refresh", post(refresh));
    let app = match &state.config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    app.with_state(state)
}

#[derive(Serialize)]
struct ErrorBody {
    error: String,
}

fn error(status: StatusCode, msg: impl Into<String>) -> Response {
    (status, Json(ErrorBody { error: msg.into() })).into_response()
}

fn store_error(e: Error) -> Response {
    match e {
        Error::Domain(m) => error(StatusCode::NOT_FOUND, m),
        Error::Validation(m) => error(StatusCode::UNPROCESSABLE_ENTITY, m),
        other => error(StatusCode::INTERNAL_SERVER_ERROR, other.to_string()),
    }
}

fn lock(state: &AppState) -> std::sync::MutexGuard<'_, Store> {
    state.store.lock().unwrap_or_else(|p| p.into_inner())
}

#[derive(Deserialize)]
struct NextQuery {
    annotator: Option<String>,
}

async fn next_task(State(state): State<AppState>, Query(q): Query<NextQuery>) -> Response {
    let Some(annotator) = q.annotator.filter(|a| !a.is_empty()) else {
        return error(StatusCode::BAD_REQUEST, "missing annotator");
    };
    let store = lock(&state);
    match store.state().next_task(&annotator) {
        Some(t) => Json(t).into_response(),
        None => StatusCode::NO_CONTENT.into_response(),
    }
}

#[derive(Deserialize)]
pub struct LabelBody {
    pub annotator: String,
    #[serde(default)]
    pub stem: Option<String>,
    #[serde(default)]
    pub skip: bool,
}

#[derive(Serialize)]
struct LabelResponse {
    word: String,
    status: super::store::Status,
}

async fn label(State(state): State<AppState>, Path(word): Path<String>, Json(body): Json<LabelBody>) -> Response {
    if body.annotator.is_empty() {
        return error(StatusCode::UNPROCESSABLE_ENTITY, "missing annotator");
    }
    let stem = match (body.skip, body.stem.as_deref()) {
        (true, _) => None,
        (false, Some(s)) => Some(s),
        (false, None) => return error(StatusCode::UNPROCESSABLE_ENTITY, "need a stem or skip"),
    };
    let mut store = lock(&state);
    if store.state().task(&word).is_none() {
        return error(StatusCode::NOT_FOUND, format!("unknown task {word:?}"));
    }
    match store.label(&word, &body.annotator, stem) {
        Ok(()) => {
            let status = store.state().task(&word).map(|t| t.status).expect("task exists");
            Json(LabelResponse { word, status }).into_response()
        }
        Err(e) => store_error(e),
    }
}

async fn stats(State(state): State<AppState>) -> Response {
    Json(lock(&state).state().stats()).into_response()
}

#[derive(Deserialize)]
struct ExportQuery {
    annotators: Option<String>,
}

async fn export(State(state): State<AppState>, Query(q): Query<ExportQuery>) -> Response {
    let filter: Option<BTreeSet<String>> = q
        .annotators
        .map(|a| a.split(',').map(str::trim).filter(|s| !s.is_empty()).map(String::from).collect());
    let labels = lock(&state).state().export(filter.as_ref());
    ([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], format_labels(&labels)).into_response()
}

#[derive(Serialize)]
struct RefreshResponse {
    queue: usize,
}

async fn refresh(State(state): State<AppState>, body: String) -> Response {
    let preds = match parse_predictions(&body) {
        Ok(p) => p,
        Err(e) => return error(StatusCode::BAD_REQUEST, e.to_string()),
    };
    let batch = select_uncertain(&preds, state.config.min_entropy, state.config.top);
    let tasks: Vec<_> = batch
        .iter()
        .filter(|p| !p.stems.is_empty())
        .map(|p| task_from_prediction(p, &state.analyzer))
        .collect();
    let queue = tasks.len();
    let mut store = lock(&state);
    match store.replace_queue(tasks) {
        Ok(()) => Json(RefreshResponse { queue }).into_response(),
        Err(e) => store_error(e),
    }
}
