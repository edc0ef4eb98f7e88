//! HTTP+JSON front end.
//!
//! | method | path                    | body / reply                      |
//! |--------|-------------------------|-----------------------------------|
//! | POST   | `/v1/jobs`              | `{instance, options}` → `{id}`    |
//! | GET    | `/v1/jobs/{id}`         | job metadata                      |
//! | GET    | `/v1/jobs/{id}/solution`| solution document                 |
//! | DELETE | `/v1/jobs/{id}`         | cancel; job metadata              |
//! | GET    | `/v1/health`            | `{status: "ok", ...}`             |
//!
//! Errors reply with `{error, detail}`.

use std::future::Future;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use uuid::Uuid;

use scuc_core::SolverOptions;

use crate::jobs::{JobService, ServiceError};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SubmitBody {
    instance: Value,
    #[serde(default)]
    options: SolverOptions,
}

#[derive(Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct SubmitReply {
    pub id: Uuid,
}

/// Error body shared by every endpoint.
#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct ErrorBody {
    pub error: String,
    pub detail: Value,
}

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let msg = self.0.to_string();
        let (code, error, detail) = match self.0 {
            ServiceError::Schema(m) => (StatusCode::BAD_REQUEST, "schema", json!(m)),
            ServiceError::Validation(v) => (StatusCode::BAD_REQUEST, "validation", json!(v)),
            ServiceError::Options(m) => (StatusCode::BAD_REQUEST, "options", json!(m)),
            ServiceError::UnknownJob(_) => (StatusCode::NOT_FOUND, "unknown_job", json!(msg)),
            ServiceError::NotReady { status, detail } => (
                StatusCode::CONFLICT,
                "not_ready",
                json!({ "status": status, "message": detail }),
            ),
            ServiceError::QueueFull(_) => (StatusCode::TOO_MANY_REQUESTS, "queue_full", json!(msg)),
            ServiceError::ShuttingDown => (StatusCode::SERVICE_UNAVAILABLE, "shutting_down", json!(msg)),
        };
        let body = ErrorBody {
            error: error.into(),
            detail,
        };
        (code, Json(body)).into_response()
    }
}

type Svc = Arc<JobService>;

fn parse_id(raw: &str) -> Result<Uuid, ApiError> {
    Uuid::parse_str(raw).map_err(|_| ApiError(ServiceError::UnknownJob(raw.to_string())))
}

async fn submit(State(svc): State<Svc>, body: Bytes) -> Result<(StatusCode, Json<SubmitReply>), ApiError> {
    let body: SubmitBody =
        serde_json::from_slice(&body).map_err(|e| ServiceError::Schema(e.to_string()))?;
    let document = body.instance.to_string();
    let id = svc.submit_document(&document, body.options)?;
    Ok((StatusCode::ACCEPTED, Json(SubmitReply { id })))
}

async fn status(State(svc): State<Svc>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(svc.status(parse_id(&id)?)?).into_response())
}

async fn solution(State(svc): State<Svc>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(svc.result(parse_id(&id)?)?).into_response())
}

async fn cancel(State(svc): State<Svc>, Path(id): Path<String>) -> Result<Response, ApiError> {
    Ok(Json(svc.cancel(parse_id(&id)?)?).into_response())
}

async fn health(State(svc): State<Svc>) -> Json<Value> {
    let s = svc.stats();
    Json(json!({
        "status": "ok",
        "workers": s.workers,
        "queued": s.queued,
        "running": s.running,
    }))
}

async fn not_found() -> ApiError {
    ApiError(ServiceError::UnknownJob("no such route".into()))
}

pub fn router(service: Arc<JobService>) -> Router {
    Router::new()
        .route("/v1/jobs", post(submit))
        .route("/v1/jobs/{id}", get(status).delete(cancel))
        .route("/v1/jobs/{id}/solution", get(solution))
        .route("/v1/health", get(health))
        .fallback(not_found)
        .with_state(service)
}

/// Serves until `shutdown` resolves.
pub async fn serve(
    listener: tokio::net::TcpListener,
    service: Arc<JobService>,
    shutdown: impl Future<Output = ()> + Send + 'static,
) -> std::io::Result<()> {
    axum::serve(listener, router(service))
        .with_graceful_shutdown(shutdown)
        .await
}
