//! JSON-over-HTTP challenge service.
//!
//! | route                      | purpose                                   |
//! |----------------------------|-------------------------------------------|
//! | `POST /api/challenge`      | issue a challenge, `{radius?}`            |
//! | `GET /api/image/{id}.png`  | the challenge image while pending         |
//! | `POST /api/verify`         | one-shot check, `{id, response}`          |
//! | `POST /api/trial/answer`   | blind trial answer, `{id, response, rating}` |
//! | `GET /api/report`          | metrics over the trial transcript         |
//!
//! Truth text never leaves the server through any of these routes.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderValue, Method, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use blurcap_core::challenge::{make_challenge_with, random_seed};
use blurcap_core::evaluate::{
    aggregate, exact_match, Responder, TranscriptWriter, TrialRecord, MAX_RATING, MIN_RATING,
};
use blurcap_core::raster::write_png;
use blurcap_core::{ChallengeId, ChallengeSpec};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tokio::task::JoinHandle;
use tower_http::cors::{AllowOrigin, CorsLayer};
use tower_http::services::ServeDir;

use crate::clock::Clock;
use crate::config::ServiceConfig;
use crate::store::{ChallengeStore, StoreError};

#[derive(Clone)]
pub struct AppState {
    inner: Arc<Inner>,
}

struct Inner {
    store: ChallengeStore,
    clock: Arc<dyn Clock>,
    transcript: TranscriptWriter,
    template: ChallengeSpec,
    max_radius: f64,
    allow_empty_answers: bool,
    static_dir: Option<PathBuf>,
    trial_origin: Option<String>,
}

impl AppState {
    pub fn new(config: &ServiceConfig, clock: Arc<dyn Clock>) -> std::io::Result<Self> {
        Ok(Self {
            inner: Arc::new(Inner {
                store: ChallengeStore::new(config.ttl()),
                clock,
                transcript: TranscriptWriter::open(&config.transcript_path())?,
                template: config.template(),
                max_radius: config.max_radius,
                allow_empty_answers: config.allow_empty_answers,
                static_dir: config.static_dir.clone(),
                trial_origin: config.trial_origin.clone(),
            }),
        })
    }

    pub fn store(&self) -> &ChallengeStore {
        &self.inner.store
    }

    pub fn transcript(&self) -> &TranscriptWriter {
        &self.inner.transcript
    }

    fn now(&self) -> u64 {
        self.inner.clock.now_ms()
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        Self {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, message)
    }

    fn internal(message: impl Into<String>) -> Self {
        Self::new(StatusCode::INTERNAL_SERVER_ERROR, message)
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> Self {
        let status = match e {
            StoreError::Unknown => StatusCode::NOT_FOUND,
            StoreError::Gone => StatusCode::GONE,
        };
        Self::new(status, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(serde_json::json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

fn parse_body<T: DeserializeOwned>(body: &Bytes) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(format!("invalid request body: {e}")))
}

fn parse_id(raw: &str) -> ApiResult<ChallengeId> {
    ChallengeId::parse(raw).ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown challenge"))
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChallengeRequest {
    radius: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ChallengeResponse {
    pub id: String,
    pub image_url: String,
    /// Milliseconds since the Unix epoch.
    pub expires_at: u64,
}

async fn create_challenge(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<ChallengeResponse>> {
    let request: ChallengeRequest = if body.iter().all(u8::is_ascii_whitespace) {
        ChallengeRequest::default()
    } else {
        parse_body(&body)?
    };
    let radius = request.radius.unwrap_or(state.inner.template.radius);
    if !(radius >= 0.0 && radius.is_finite()) {
        return Err(ApiError::bad_request("radius must be a non-negative number"));
    }
    if radius > state.inner.max_radius {
        return Err(ApiError::bad_request(format!(
            "radius must not exceed {}",
            state.inner.max_radius
        )));
    }

    let spec = ChallengeSpec {
        seed: random_seed(),
        radius,
        ..state.inner.template.clone()
    };
    let now = state.now();
    let (challenge, png) = tokio::task::spawn_blocking(move || {
        let challenge = make_challenge_with(&spec, ChallengeId::random(), now)?;
        let png = write_png(&challenge.image);
        Ok::<_, blurcap_core::challenge::ChallengeError>((challenge, png))
    })
    .await
    .map_err(|e| ApiError::internal(e.to_string()))?
    .map_err(|e| ApiError::internal(e.to_string()))?;

    let id = challenge.id.to_string();
    let expires_at = state.inner.store.insert(challenge, png, now);
    Ok(Json(ChallengeResponse {
        image_url: format!("/api/image/{id}.png"),
        id,
        expires_at,
    }))
}

async fn challenge_image(State(state): State<AppState>, Path(file): Path<String>) -> ApiResult<Response> {
    let raw = file
        .strip_suffix(".png")
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "unknown challenge"))?;
    let id = parse_id(raw)?;
    let png = state.inner.store.image(&id, state.now())?;
    Ok((
        [
            (header::CONTENT_TYPE, HeaderValue::from_static("image/png")),
            (header::CACHE_CONTROL, HeaderValue::from_static("no-store")),
        ],
        png.to_vec(),
    )
        .into_response())
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyRequest {
    id: String,
    response: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VerifyResponse {
    pub pass: bool,
}

async fn verify(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<VerifyResponse>> {
    let request: VerifyRequest = parse_body(&body)?;
    let id = parse_id(&request.id)?;
    let taken = state.inner.store.consume(&id, state.now())?;
    Ok(Json(VerifyResponse {
        pass: exact_match(&taken.truth, &request.response),
    }))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrialAnswer {
    id: String,
    response: String,
    rating: i64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrialAnswerResponse {
    pub recorded: bool,
}

async fn trial_answer(State(state): State<AppState>, body: Bytes) -> ApiResult<Json<TrialAnswerResponse>> {
    let answer: TrialAnswer = parse_body(&body)?;
    let rating = u8::try_from(answer.rating)
        .ok()
        .filter(|r| (MIN_RATING..=MAX_RATING).contains(r))
        .ok_or_else(|| ApiError::bad_request("rating must be an integer from 1 to 10"))?;
    if !state.inner.allow_empty_answers && answer.response.trim().is_empty() {
        return Err(ApiError::bad_request("an answer is required"));
    }
    let id = parse_id(&answer.id)?;
    let now = state.now();
    let taken = state.inner.store.consume(&id, now)?;
    let record = TrialRecord {
        challenge_id: id.to_string(),
        truth: taken.truth,
        response: answer.response,
        responder: Responder::Human,
        rating: Some(rating),
        radius: taken.radius,
        elapsed_ms: Some(now.saturating_sub(taken.created_at_ms)),
        error: None,
    };
    state
        .inner
        .transcript
        .append(&record)
        .map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(TrialAnswerResponse { recorded: true }))
}

async fn report(State(state): State<AppState>) -> ApiResult<Response> {
    let records = state
        .inner
        .transcript
        .read_all()
        .map_err(|e| ApiError::internal(e.to_string()))?;
    if records.is_empty() {
        return Ok(StatusCode::NO_CONTENT.into_response());
    }
    let report = aggregate(&records).map_err(|e| ApiError::internal(e.to_string()))?;
    Ok(Json(report).into_response())
}

fn cors(origin: Option<&str>) -> CorsLayer {
    let allow = match origin.and_then(|o| HeaderValue::from_str(o).ok()) {
        Some(o) => AllowOrigin::exact(o),
        None => AllowOrigin::any(),
    };
    CorsLayer::new()
        .allow_origin(allow)
        .allow_methods([Method::GET, Method::POST])
        .allow_headers([header::CONTENT_TYPE])
}

pub fn router(state: AppState) -> Router {
    let mut app = Router::new()
        .route("/api/challenge", post(create_challenge))
        .route("/api/image/{file}", get(challenge_image))
        .route("/api/verify", post(verify))
        .route("/api/trial/answer", post(trial_answer))
        .route("/api/report", get(report));
    if let Some(dir) = &state.inner.static_dir {
        app = app.nest_service("/trial", ServeDir::new(dir).append_index_html_on_directories(true));
    }
    let layer = cors(state.inner.trial_origin.as_deref());
    app.with_state(state).layer(layer)
}

/// Serves on `addr` in a background task and returns the bound address.
pub async fn start(state: AppState, addr: SocketAddr) -> std::io::Result<(SocketAddr, JoinHandle<()>)> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    let local = listener.local_addr()?;
    let handle = tokio::spawn(async move {
        let _ = axum::serve(listener, router(state)).await;
    });
    Ok((local, handle))
}

/// Binds and serves until Ctrl-C.
pub async fn serve(config: &ServiceConfig, clock: Arc<dyn Clock>) -> anyhow::Result<()> {
    let state = AppState::new(config, clock)?;
    let listener = tokio::net::TcpListener::bind(config.listen).await?;
    eprintln!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, router(state))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await?;
    Ok(())
}
