//! HTTP scoring service over a load-once model registry.

use std::net::SocketAddr;
use std::sync::Arc;

use anyhow::{Context, Result};
use axum::body::Bytes;
use axum::extract::{DefaultBodyLimit, FromRequest, Multipart, Query, Request, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use capt_core::nn::{Prediction, Verdict};
use capt_core::registry::{ModelRegistry, WordInfo};
use serde::{Deserialize, Serialize};

const MAX_UPLOAD_BYTES: usize = 32 * 1024 * 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreResponse {
    pub word_id: String,
    pub probability: f64,
    pub verdict: Verdict,
    pub model_version: String,
}

impl ScoreResponse {
    pub fn new(word_id: String, p: Prediction, model_version: String) -> Self {
        Self {
            word_id,
            probability: p.probability,
            verdict: p.verdict,
            model_version,
        }
    }
}

#[derive(Debug)]
struct ApiError(StatusCode, String);

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.0, Json(serde_json::json!({ "error": self.1 }))).into_response()
    }
}

fn bad_request(reason: impl Into<String>) -> ApiError {
    ApiError(StatusCode::BAD_REQUEST, reason.into())
}

#[derive(Debug, Deserialize)]
struct ScoreQuery {
    word_id: Option<String>,
}

pub fn router(registry: Arc<ModelRegistry>) -> Router {
    Router::new()
        .route("/v1/health", get(health))
        .route("/v1/words", get(words))
        .route("/v1/score", post(score))
        .layer(DefaultBodyLimit::max(MAX_UPLOAD_BYTES))
        .with_state(registry)
}

async fn health() -> Json<serde_json::Value> {
    Json(serde_json::json!({ "status": "ok" }))
}

async fn words(State(registry): State<Arc<ModelRegistry>>) -> Json<Vec<WordInfo>> {
    Json(registry.words())
}

/// WAV bytes from either a raw body or the first multipart file part.
async fn read_audio(req: Request) -> Result<Bytes, ApiError> {
    let is_multipart = req
        .headers()
        .get(header::CONTENT_TYPE)
        .and_then(|v| v.to_str().ok())
        .is_some_and(|v| v.starts_with("multipart/form-data"));
    if !is_multipart {
        return Bytes::from_request(req, &())
            .await
            .map_err(|e| bad_request(format!("reading body: {e}")));
    }
    let mut multipart = Multipart::from_request(req, &())
        .await
        .map_err(|e| bad_request(format!("multipart: {e}")))?;
    while let Some(field) = multipart
        .next_field()
        .await
        .map_err(|e| bad_request(format!("multipart: {e}")))?
    {
        if field.file_name().is_some() || field.name() == Some("audio") {
            return field
                .bytes()
                .await
                .map_err(|e| bad_request(format!("multipart: {e}")));
        }
    }
    Err(bad_request("multipart body has no audio part"))
}

async fn score(
    State(registry): State<Arc<ModelRegistry>>,
    Query(query): Query<ScoreQuery>,
    req: Request,
) -> Result<Json<ScoreResponse>, ApiError> {
    let word_id = query
        .word_id
        .ok_or_else(|| bad_request("missing word_id query parameter"))?;
    if registry.get(&word_id).is_err() {
        return Err(ApiError(StatusCode::NOT_FOUND, "unknown word".into()));
    }
    let audio = read_audio(req).await?;
    let response = tokio::task::spawn_blocking(move || {
        let entry = registry.get(&word_id).expect("checked above");
        entry
            .scorer
            .score_wav(&audio)
            .map(|p| ScoreResponse::new(word_id.clone(), p, entry.info.model_version.clone()))
    })
    .await
    .map_err(|e| ApiError(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
    .map_err(|e| bad_request(e.to_string()))?;
    Ok(Json(response))
}

/// Binds `addr` and serves until the process ends. Returns the bound
/// address through `on_bound` so callers can use port 0.
pub async fn serve(
    registry: ModelRegistry,
    addr: SocketAddr,
    on_bound: impl FnOnce(SocketAddr),
) -> Result<()> {
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    on_bound(listener.local_addr()?);
    axum::serve(listener, router(Arc::new(registry)))
        .await
        .context("serving")
}
