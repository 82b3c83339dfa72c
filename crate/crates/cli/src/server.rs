//! Stateless HTTP JSON service.

use std::time::{Duration, Instant};

use axum::body::Bytes;
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use tower_http::cors::CorsLayer;

use crate::api::{self, ApiError, ErrorClass};
use crate::dto::ModelFile;

/// Wall-clock cap for one request.
pub const BUDGET: Duration = Duration::from_secs(60);

pub fn router() -> Router {
    Router::new()
        .route("/api/health", get(health))
        .route("/api/sigma", post(sigma))
        .route("/api/continue", post(continue_))
        .route("/api/holonomy", post(holonomy))
        .route("/api/oracle", post(oracle))
        .layer(CorsLayer::permissive())
}

pub async fn serve(addr: std::net::SocketAddr) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router()).await
}

fn json(status: StatusCode, body: String) -> Response {
    (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn respond(result: Result<String, ApiError>) -> Response {
    match result {
        Ok(body) => json(StatusCode::OK, body),
        Err(e) => {
            let status = match e.class {
                ErrorClass::Engine => StatusCode::UNPROCESSABLE_ENTITY,
                _ => StatusCode::BAD_REQUEST,
            };
            json(status, e.body())
        }
    }
}

fn text(body: &Bytes) -> Result<&str, ApiError> {
    std::str::from_utf8(body).map_err(|e| ApiError::malformed(e.to_string()))
}

/// Runs `f` off the async workers.
async fn compute<F>(f: F) -> Response
where
    F: FnOnce(Instant) -> Result<String, ApiError> + Send + 'static,
{
    let deadline = Instant::now() + BUDGET;
    let result =
        tokio::task::spawn_blocking(move || f(deadline)).await.unwrap_or_else(|e| Err(ApiError::engine("Internal", e.to_string())));
    respond(result)
}

async fn health() -> Response {
    json(StatusCode::OK, api::render(&serde_json::json!({ "status": "ok" })))
}

async fn sigma(body: Bytes) -> Response {
    compute(move |_| {
        let m: ModelFile = api::parse(text(&body)?)?;
        Ok(api::render(&api::sigma(&m)?))
    })
    .await
}

async fn continue_(body: Bytes) -> Response {
    compute(move |deadline| {
        let req: api::ContinueRequest = api::parse(text(&body)?)?;
        Ok(api::render(&api::continuation(&req, Some(deadline))?.file))
    })
    .await
}

async fn holonomy(body: Bytes) -> Response {
    compute(move |deadline| {
        let req: api::HolonomyRequest = api::parse(text(&body)?)?;
        Ok(api::render(&api::holonomy(&req, Some(deadline))?))
    })
    .await
}

async fn oracle(body: Bytes) -> Response {
    compute(move |_| {
        let req: api::OracleRequest = api::parse(text(&body)?)?;
        Ok(api::render(&api::oracle(&req)?))
    })
    .await
}
