//! Stateless HTTP API consumed by the web frontend.
//!
//! Every endpoint takes a JSON body and answers with the same JSON the CLI
//! prints. Failures come back as `{"error": …, "exit_code": …}` with status
//! 422 for invalid input and 500 for numerical failures.

use axum::body::Bytes;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::json;

use crate::error::CliError;
use crate::ops::*;

pub fn router() -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/synthesize", post(|body: Bytes| handle(body, synthesize_op)))
        .route("/api/roots", post(|body: Bytes| handle(body, roots_op)))
        .route("/api/simulate", post(|body: Bytes| handle(body, simulate_op)))
        .route(
            "/api/design/second-order",
            post(|body: Bytes| handle(body, second_order_op)),
        )
        .route(
            "/api/design/wind-tunnel",
            post(|body: Bytes| handle(body, wind_tunnel_op)),
        )
}

async fn health() -> Json<serde_json::Value> {
    Json(json!({ "status": "ok" }))
}

fn error_response(e: CliError) -> Response {
    let status = match e {
        CliError::Validation(_) => StatusCode::UNPROCESSABLE_ENTITY,
        CliError::Numerical(_) => StatusCode::INTERNAL_SERVER_ERROR,
    };
    let body = json!({ "error": e.to_string(), "exit_code": e.exit_code() });
    (status, Json(body)).into_response()
}

async fn handle<Req, Resp, F>(body: Bytes, op: F) -> Response
where
    Req: DeserializeOwned + Send + 'static,
    Resp: Serialize + Send + 'static,
    F: Fn(&Req) -> Result<Resp, CliError> + Send + 'static,
{
    let req: Req = match serde_json::from_slice(&body) {
        Ok(r) => r,
        Err(e) => return error_response(e.into()),
    };
    match tokio::task::spawn_blocking(move || op(&req)).await {
        Ok(Ok(resp)) => Json(resp).into_response(),
        Ok(Err(e)) => error_response(e),
        Err(e) => error_response(CliError::numerical(format!("worker failed: {e}"))),
    }
}
