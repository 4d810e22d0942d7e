//! JSON HTTP API.
//!
//! | method | path | body |
//! |---|---|---|
//! | POST | `/sessions` | [`NewSession`] |
//! | GET | `/sessions` | |
//! | GET | `/sessions/:id` | |
//! | POST | `/sessions/:id/iterate` | |
//! | POST | `/sessions/:id/feedback` | [`UserAnswers`] |
//! | GET | `/sessions/:id/questions` | |
//! | GET | `/sessions/:id/artifacts/:ref` | PNG bytes |
//! | GET | `/health` | |
//!
//! Errors are `{"error": message}` with 400, 404, 409 or 500.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::Serialize;
use serde_json::json;

use forge_core::qa::UserAnswers;

use crate::error::ServiceError;
use crate::session::{NewSession, Orchestrator, Session};

pub type Shared = Arc<Orchestrator>;

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let code = match &self {
            ServiceError::NotFound(_) | ServiceError::ArtifactNotFound(_) => StatusCode::NOT_FOUND,
            ServiceError::WrongState { .. } | ServiceError::AlreadyExists(_) => StatusCode::CONFLICT,
            ServiceError::InvalidInput(_) | ServiceError::InvalidProgram(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        (code, Json(json!({ "error": self.to_string() }))).into_response()
    }
}

#[derive(Serialize)]
pub struct SessionView {
    #[serde(flatten)]
    pub session: Session,
    pub best_index: Option<u32>,
    pub best_score: Option<f64>,
    pub best_artifact: Option<String>,
}

impl From<Session> for SessionView {
    fn from(session: Session) -> Self {
        let best = session.best().cloned();
        SessionView {
            best_index: best.as_ref().map(|b| b.index),
            best_score: best.as_ref().and_then(|b| b.score),
            best_artifact: best.and_then(|b| b.artifact_ref).map(|a| a.0),
            session,
        }
    }
}

async fn blocking<T, F>(f: F) -> Result<T, ServiceError>
where
    F: FnOnce() -> Result<T, ServiceError> + Send + 'static,
    T: Send + 'static,
{
    tokio::task::spawn_blocking(f).await.map_err(|e| ServiceError::Internal(e.to_string()))?
}

fn parse<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, ServiceError> {
    if body.is_empty() {
        return serde_json::from_str("{}").map_err(|e| ServiceError::InvalidInput(e.to_string()));
    }
    serde_json::from_slice(body).map_err(|e| ServiceError::InvalidInput(e.to_string()))
}

async fn create(State(o): State<Shared>, body: Bytes) -> Result<Response, ServiceError> {
    let req: NewSession = parse(&body)?;
    let s = blocking(move || o.create(req)).await?;
    Ok((StatusCode::CREATED, Json(SessionView::from(s))).into_response())
}

async fn list(State(o): State<Shared>) -> Result<Json<Vec<String>>, ServiceError> {
    Ok(Json(blocking(move || o.list()).await?))
}

async fn show(State(o): State<Shared>, Path(id): Path<String>) -> Result<Json<SessionView>, ServiceError> {
    Ok(Json(blocking(move || o.get(&id)).await?.into()))
}

async fn iterate(State(o): State<Shared>, Path(id): Path<String>) -> Result<Json<serde_json::Value>, ServiceError> {
    let out = blocking(move || o.iterate(&id)).await?;
    Ok(Json(json!({
        "records": out.records,
        "traces": out.traces,
        "session": SessionView::from(out.session),
    })))
}

async fn feedback(
    State(o): State<Shared>,
    Path(id): Path<String>,
    body: Bytes,
) -> Result<Json<SessionView>, ServiceError> {
    let answers: UserAnswers = parse(&body)?;
    Ok(Json(blocking(move || o.submit_feedback(&id, answers)).await?.into()))
}

async fn questions(State(o): State<Shared>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let qs = blocking(move || o.questions(&id)).await?;
    Ok(Json(qs).into_response())
}

async fn artifact(State(o): State<Shared>, Path((id, r)): Path<(String, String)>) -> Result<Response, ServiceError> {
    let r = r.trim_end_matches(".png").to_string();
    let bytes = blocking(move || o.artifact(&id, &r)).await?;
    Ok(([(header::CONTENT_TYPE, "image/png")], bytes).into_response())
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

pub fn router(o: Shared) -> Router {
    Router::new()
        .route("/health", get(health))
        .route("/sessions", post(create).get(list))
        .route("/sessions/:id", get(show))
        .route("/sessions/:id/iterate", post(iterate))
        .route("/sessions/:id/feedback", post(feedback))
        .route("/sessions/:id/questions", get(questions))
        .route("/sessions/:id/artifacts/:ref", get(artifact))
        .with_state(o)
}

pub async fn serve(o: Shared, addr: &str) -> anyhow::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    eprintln!("listening on {}", listener.local_addr()?);
    axum::serve(listener, router(o)).await?;
    Ok(())
}
