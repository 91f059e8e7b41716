//! HTTP JSON API over a [`SessionStore`].
//!
//! | method | path                            | body / query                  |
//! |--------|---------------------------------|-------------------------------|
//! | POST   | `/sessions`                     | `{"sample_names": [..], "sheet": {"width", "height"}}` |
//! | GET    | `/sessions`                     | sorted ids                    |
//! | GET    | `/sessions/{id}`                |                               |
//! | POST   | `/sessions/{id}/tablecloths`    | `SubmissionPayload`           |
//! | GET    | `/sessions/{id}/consensus`      | `?format=svg\|csv\|json&seed=N` |
//! | GET    | `/sessions/{id}/export.csv`     |                               |
//!
//! Consensus responses carry `x-sensograph-samples`, `x-sensograph-assessors`,
//! `x-sensograph-final-energy` and `x-sensograph-converged` headers. Errors are
//! `{"error": "..."}` with a 4xx/5xx status; a session without tablecloths
//! answers 409.

use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, HeaderName, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use sensograph::ingest::serialize_table;
use sensograph::{analyze, Error, Session, SessionStore, Sheet, SubmissionPayload, SubmitOutcome};

use crate::config::Config;

pub struct AppState {
    pub store: SessionStore,
    pub config: Config,
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/sessions", post(create_session).get(list_sessions))
        .route("/sessions/{id}", get(get_session))
        .route("/sessions/{id}/tablecloths", post(submit_tablecloth))
        .route("/sessions/{id}/consensus", get(get_consensus))
        .route("/sessions/{id}/export.csv", get(export_csv))
        .with_state(state)
}

pub struct ApiError(Error);

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        Self(e)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let status = match &self.0 {
            Error::UnknownSession(_) => StatusCode::NOT_FOUND,
            Error::NoData => StatusCode::CONFLICT,
            Error::Parse { .. } | Error::Validation(_) | Error::SampleCountMismatch { .. } => {
                StatusCode::UNPROCESSABLE_ENTITY
            }
            Error::CorruptSession { .. } | Error::Io(_) => StatusCode::INTERNAL_SERVER_ERROR,
        };
        if status.is_server_error() {
            log::error!("{}", self.0);
        }
        (status, Json(serde_json::json!({ "error": self.0.to_string() }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// Store access does blocking file IO, so it runs off the async workers.
async fn blocking<T: Send + 'static>(
    state: &Arc<AppState>,
    f: impl FnOnce(&AppState) -> sensograph::Result<T> + Send + 'static,
) -> ApiResult<T> {
    let state = Arc::clone(state);
    match tokio::task::spawn_blocking(move || f(&state)).await {
        Ok(r) => r.map_err(ApiError),
        Err(e) => Err(ApiError(Error::Io(std::io::Error::other(e.to_string())))),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateSession {
    pub sample_names: Vec<String>,
    #[serde(default)]
    pub sheet: Option<Sheet>,
}

async fn create_session(
    State(state): State<Arc<AppState>>,
    Json(req): Json<CreateSession>,
) -> ApiResult<(StatusCode, Json<Session>)> {
    let sheet = match req.sheet {
        Some(s) => Sheet::new(s.width, s.height)?,
        None => Sheet::default(),
    };
    let session = blocking(&state, move |s| s.store.create(req.sample_names, sheet)).await?;
    log::info!("created session {}", session.id);
    Ok((StatusCode::CREATED, Json(session)))
}

async fn list_sessions(State(state): State<Arc<AppState>>) -> ApiResult<Json<Vec<String>>> {
    let mut ids = blocking(&state, |s| s.store.list()).await?;
    ids.sort();
    Ok(Json(ids))
}

async fn get_session(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Json<Session>> {
    Ok(Json(blocking(&state, move |s| s.store.load(&id)).await?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SubmitResponse {
    pub outcome: SubmitOutcome,
    pub tablecloths: usize,
}

async fn submit_tablecloth(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Json(payload): Json<SubmissionPayload>,
) -> ApiResult<Json<SubmitResponse>> {
    let (session, outcome) = blocking(&state, move |s| s.store.update(&id, |session| session.submit(&payload))).await?;
    Ok(Json(SubmitResponse {
        outcome,
        tablecloths: session.tablecloths.len(),
    }))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Svg,
    Csv,
    Json,
}

#[derive(Debug, Deserialize)]
pub struct ConsensusQuery {
    #[serde(default)]
    pub format: Format,
    pub seed: Option<u64>,
}

fn header_value(v: impl ToString) -> HeaderValue {
    HeaderValue::from_str(&v.to_string()).expect("numeric header value")
}

async fn get_consensus(
    State(state): State<Arc<AppState>>,
    Path(id): Path<String>,
    Query(q): Query<ConsensusQuery>,
) -> ApiResult<Response> {
    let (analysis, body) = blocking(&state, move |s| {
        let session = s.store.load(&id)?;
        let params = s.config.layout_params(&session.sheet, q.seed);
        let analysis = analyze(&session.sample_names, &session.tablecloths, &params)?;
        let body = match q.format {
            Format::Svg => analysis.svg(&s.config.render)?,
            Format::Csv => analysis.matrix_csv(),
            Format::Json => analysis.json(),
        };
        Ok((analysis, body))
    })
    .await?;
    let content_type = match q.format {
        Format::Svg => "image/svg+xml",
        Format::Csv => "text/csv; charset=utf-8",
        Format::Json => "application/json",
    };
    let mut headers = HeaderMap::new();
    headers.insert(header::CONTENT_TYPE, HeaderValue::from_static(content_type));
    headers.insert(HeaderName::from_static("x-sensograph-samples"), header_value(analysis.sample_count()));
    headers.insert(HeaderName::from_static("x-sensograph-assessors"), header_value(analysis.assessor_count()));
    headers.insert(HeaderName::from_static("x-sensograph-final-energy"), header_value(analysis.layout.final_energy));
    headers.insert(HeaderName::from_static("x-sensograph-converged"), header_value(analysis.layout.converged));
    Ok((headers, body).into_response())
}

async fn export_csv(State(state): State<Arc<AppState>>, Path(id): Path<String>) -> ApiResult<Response> {
    let body = blocking(&state, move |s| Ok(serialize_table(&s.store.load(&id)?.to_table()?))).await?;
    Ok(([(header::CONTENT_TYPE, "text/csv; charset=utf-8")], body).into_response())
}

/// Serves until ctrl-c. `on_bound` receives the actual local address, which
/// differs from `addr` when binding port 0.
pub async fn serve(
    addr: &str,
    state: Arc<AppState>,
    on_bound: impl FnOnce(std::net::SocketAddr),
) -> std::io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    on_bound(listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
