use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::api::{parse_factors, to_wire, Workbench, DEFAULT_FACTORS};
use crate::error::{ApiError, ErrorCode};

/// A wire body: the rendered value or the rendered error.
pub struct Wire(Result<String, ApiError>);

impl Wire {
    fn of<T: Serialize>(result: Result<T, ApiError>) -> Self {
        Wire(result.map(|v| to_wire(&v)))
    }
}

impl IntoResponse for Wire {
    fn into_response(self) -> Response {
        let (status, body) = match self.0 {
            Ok(body) => (StatusCode::OK, body),
            Err(e) => (
                StatusCode::from_u16(e.code.http_status()).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR),
                to_wire(&e),
            ),
        };
        (status, [(header::CONTENT_TYPE, "application/json")], body).into_response()
    }
}

fn parse<T: DeserializeOwned>(body: &str) -> Result<T, ApiError> {
    Ok(serde_json::from_str(body)?)
}

type Shared = State<Arc<Workbench>>;

async fn transcode(State(wb): Shared, body: String) -> Wire {
    Wire::of(parse(&body).and_then(|req| wb.transcode(&req)))
}

async fn derive(State(wb): Shared, body: String) -> Wire {
    Wire::of(parse(&body).and_then(|req| wb.derive(&req)))
}

async fn enumerate(State(wb): Shared, body: String) -> Wire {
    let result = tokio::task::spawn_blocking(move || parse(&body).and_then(|req| wb.enumerate(&req)))
        .await
        .unwrap_or_else(|e| Err(ApiError::bad_request(format!("enumeration aborted: {e}"))));
    Wire::of(result)
}

async fn facts_house(State(wb): Shared, Query(query): Query<HashMap<String, String>>) -> Wire {
    let factors = match query.get("base") {
        Some(text) => parse_factors(text),
        None => Ok(DEFAULT_FACTORS.to_vec()),
    };
    Wire::of(factors.and_then(|f| wb.house(&f)))
}

async fn battery_generate(State(wb): Shared, body: String) -> Wire {
    Wire::of(parse(&body).and_then(|req| wb.generate(&req)))
}

async fn battery_score(State(wb): Shared, body: String) -> Wire {
    Wire::of(parse(&body).and_then(|req| wb.score(&req)))
}

async fn cohort_compare(State(wb): Shared, body: String) -> Wire {
    Wire::of(parse(&body).and_then(|req| wb.compare(&req)))
}

async fn open_session(State(wb): Shared, body: String) -> Wire {
    Wire::of(parse(&body).and_then(|req| wb.open_session(&req)))
}

async fn get_session(State(wb): Shared, Path(id): Path<String>) -> Wire {
    Wire::of(wb.session(&id))
}

async fn post_event(State(wb): Shared, Path(id): Path<String>, body: String) -> Wire {
    Wire::of(parse(&body).and_then(|event| wb.post_event(&id, &event)))
}

async fn unknown_route() -> Wire {
    Wire(Err(ApiError::not_found("route")))
}

pub fn router(wb: Arc<Workbench>) -> Router {
    Router::new()
        .route("/sessions", post(open_session))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/events", post(post_event))
        .route("/transcode", post(transcode))
        .route("/derive", post(derive))
        .route("/derive/enumerate", post(enumerate))
        .route("/facts/house", get(facts_house))
        .route("/battery/generate", post(battery_generate))
        .route("/battery/score", post(battery_score))
        .route("/cohort/compare", post(cohort_compare))
        .fallback(unknown_route)
        .method_not_allowed_fallback(unknown_route)
        .with_state(wb)
}

/// Binds `addr` and serves until interrupted.
pub async fn serve(addr: SocketAddr, wb: Arc<Workbench>) -> Result<(), ApiError> {
    let listener = tokio::net::TcpListener::bind(addr).await.map_err(|e| {
        ApiError::new(
            ErrorCode::Io,
            format!("cannot bind {addr}: {e}; choose another address with --bind"),
            serde_json::json!({ "bind": addr.to_string() }),
        )
    })?;
    eprintln!("listening on http://{}", listener.local_addr().map(|a| a.to_string()).unwrap_or_default());
    axum::serve(listener, router(wb))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
        .map_err(|e| ApiError::new(ErrorCode::Io, format!("server stopped: {e}"), serde_json::json!({})))
}
