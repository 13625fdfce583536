//! JSON routes over a [`SessionManager`].

use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde::de::DeserializeOwned;
use tower_http::services::{ServeDir, ServeFile};

use crate::error::SessionError;
use crate::manager::SessionManager;
use crate::model::SessionRequest;

type Shared = Arc<SessionManager>;

#[derive(Debug, Serialize, Deserialize)]
pub struct AnswerBody {
    pub answer: bool,
    /// Pending question the answer is meant for; refused if it moved on.
    #[serde(default)]
    pub index: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct RollbackBody {
    pub to: usize,
}

pub struct ApiError(SessionError);

impl From<SessionError> for ApiError {
    fn from(e: SessionError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            SessionError::UnknownSession(_) => StatusCode::NOT_FOUND,
            SessionError::NoPendingQuestion | SessionError::StaleAnswer { .. } | SessionError::NotDone { .. } => {
                StatusCode::CONFLICT
            }
            e if e.is_client_error() => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (status, Json(serde_json::json!({ "error": self.0.to_string() }))).into_response()
    }
}

// axum's own JSON rejection has a different shape; keep one error format
fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError(SessionError::InvalidRequest(e.to_string())))
}

async fn blocking<T: Send + 'static>(
    f: impl FnOnce() -> Result<T, SessionError> + Send + 'static,
) -> Result<Json<T>, ApiError> {
    match tokio::task::spawn_blocking(f).await {
        Ok(r) => Ok(Json(r?)),
        Err(e) => Err(ApiError(SessionError::Io(std::io::Error::other(e.to_string())))),
    }
}

async fn create(State(m): State<Shared>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let request: SessionRequest = parse(&body)?;
    let session = blocking(move || m.create(request)).await?;
    Ok((StatusCode::CREATED, session))
}

async fn list(State(m): State<Shared>) -> impl IntoResponse {
    Json(serde_json::json!({ "sessions": m.ids() }))
}

async fn show(State(m): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(m.get(&id)?))
}

async fn answer(State(m): State<Shared>, Path(id): Path<String>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let b: AnswerBody = parse(&body)?;
    blocking(move || m.answer(&id, b.answer, b.index)).await
}

async fn rollback(State(m): State<Shared>, Path(id): Path<String>, body: Bytes) -> Result<impl IntoResponse, ApiError> {
    let b: RollbackBody = parse(&body)?;
    blocking(move || m.rollback(&id, b.to)).await
}

async fn transcript(State(m): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(m.transcript(&id)?))
}

async fn result(State(m): State<Shared>, Path(id): Path<String>) -> Result<impl IntoResponse, ApiError> {
    Ok(Json(m.result(&id)?))
}

pub fn router(manager: Arc<SessionManager>) -> Router {
    Router::new()
        .route("/api/sessions", post(create).get(list))
        .route("/api/sessions/{id}", get(show))
        .route("/api/sessions/{id}/answer", post(answer))
        .route("/api/sessions/{id}/rollback", post(rollback))
        .route("/api/sessions/{id}/transcript", get(transcript))
        .route("/api/sessions/{id}/result", get(result))
        .with_state(manager)
}

/// The API plus a directory of static assets (the built web client) at `/`.
/// Unknown paths outside `/api` fall back to `index.html`.
pub fn router_with_assets(manager: Arc<SessionManager>, assets: Option<PathBuf>) -> Router {
    let api = router(manager);
    match assets {
        Some(dir) => {
            let index = dir.join("index.html");
            api.fallback_service(ServeDir::new(dir).fallback(ServeFile::new(index)))
        }
        None => api,
    }
}

pub async fn serve(listener: tokio::net::TcpListener, app: Router) -> std::io::Result<()> {
    axum::serve(listener, app).await
}
