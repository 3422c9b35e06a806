//! HTTP front end for the blade decision engine.
//!
//! Every handler works on an immutable knowledge-base snapshot; only
//! `POST /kb/refine` replaces it, by swapping in a new one. Responses are
//! JSON bodies produced by [`blade_core::json::to_body`], so they match the
//! command-line `--format json` output byte for byte.

mod error;

use std::collections::{BTreeMap, HashMap};
use std::io;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::{Arc, RwLock};

use axum::body::Bytes;
use axum::extract::{Query, State};
use axum::http::header;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::Router;
use blade_core::bpmn::{build_profile, parse_bpmn, DEFAULT_ONCHAIN_MARKER};
use blade_core::json::to_body;
use blade_core::kb::{Interval, KnowledgeBase};
use blade_core::mcdm::{evaluate, sensitivity, SensitivityPoint};
use blade_core::perfsim::{refine_intervals, simulate, ChainParams, WorkloadSpec};
use blade_core::requirements::{parse_requirements, RequirementSet};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::services::ServeDir;

pub use error::{ApiError, ErrorCode};

/// Upper bound on arrivals a single `/simulate` request may generate.
pub const MAX_SIMULATED_ARRIVALS: f64 = 5_000_000.0;

#[derive(Clone)]
pub struct AppState {
    shared: Arc<Shared>,
}

struct Shared {
    kb: RwLock<Arc<KnowledgeBase>>,
    refine: tokio::sync::Mutex<()>,
}

impl AppState {
    pub fn new(kb: KnowledgeBase) -> Self {
        AppState {
            shared: Arc::new(Shared {
                kb: RwLock::new(Arc::new(kb)),
                refine: tokio::sync::Mutex::new(()),
            }),
        }
    }

    /// The current knowledge base.
    pub fn snapshot(&self) -> Arc<KnowledgeBase> {
        Arc::clone(&self.shared.kb.read().unwrap_or_else(|e| e.into_inner()))
    }

    fn swap(&self, kb: KnowledgeBase) {
        *self.shared.kb.write().unwrap_or_else(|e| e.into_inner()) = Arc::new(kb);
    }
}

/// Builds the router. With `ui_dir`, static files under it are served at `/ui`.
pub fn router(state: AppState, ui_dir: Option<PathBuf>) -> Router {
    let mut app = Router::new()
        .route("/health", get(health))
        .route("/kb", get(knowledge_base))
        .route("/evaluate", post(evaluate_handler))
        .route("/whatif", post(whatif))
        .route("/simulate", post(simulate_handler))
        .route("/bpmn/profile", post(bpmn_profile))
        .route("/kb/refine", post(refine))
        .fallback(not_found)
        .with_state(state);
    if let Some(dir) = ui_dir {
        app = app.nest_service("/ui", ServeDir::new(dir).fallback(axum::routing::any(not_found)));
    }
    app
}

/// Binds `addr` and serves until the process is stopped.
pub async fn serve(kb: KnowledgeBase, addr: SocketAddr, ui_dir: Option<PathBuf>) -> io::Result<()> {
    let listener = tokio::net::TcpListener::bind(addr).await?;
    axum::serve(listener, router(AppState::new(kb), ui_dir)).await
}

fn json_response(body: String) -> Response {
    ([(header::CONTENT_TYPE, "application/json")], body).into_response()
}

fn utf8(body: &Bytes) -> Result<&str, ApiError> {
    std::str::from_utf8(body).map_err(|e| ApiError::malformed(format!("body is not UTF-8: {e}")))
}

fn decode<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::malformed(e.to_string()))
}

/// Requirements must arrive as JSON here, never TOML.
fn json_requirements(text: &str) -> Result<RequirementSet, ApiError> {
    if !text.trim_start().starts_with('{') {
        return Err(ApiError::malformed("requirements must be a JSON object"));
    }
    Ok(parse_requirements(text)?)
}

async fn not_found() -> ApiError {
    ApiError::new(ErrorCode::NotFound, "no such resource")
}

#[derive(Serialize)]
struct Health {
    status: &'static str,
    kb_version: u64,
}

async fn health(State(state): State<AppState>) -> Response {
    json_response(to_body(&Health {
        status: "ok",
        kb_version: state.snapshot().kb_version(),
    }))
}

async fn knowledge_base(State(state): State<AppState>) -> Response {
    json_response(to_body(&*state.snapshot()))
}

async fn evaluate_handler(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let reqs = json_requirements(utf8(&body)?)?;
    let result = evaluate(&state.snapshot(), &reqs)?;
    Ok(json_response(to_body(&result)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WhatIfRequest {
    requirements: serde_json::Value,
    criterion: String,
    grid: Vec<f64>,
}

#[derive(Serialize)]
struct WhatIfResponse {
    criterion: String,
    points: Vec<SensitivityPoint>,
}

async fn whatif(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: WhatIfRequest = decode(&body)?;
    let reqs = json_requirements(&req.requirements.to_string())?;
    let points = sensitivity(&state.snapshot(), &reqs, &req.criterion, &req.grid)?;
    Ok(json_response(to_body(&WhatIfResponse {
        criterion: req.criterion,
        points,
    })))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SimulateRequest {
    params: ChainParams,
    workload: WorkloadSpec,
    duration: f64,
}

async fn simulate_handler(body: Bytes) -> Result<Response, ApiError> {
    let req: SimulateRequest = decode(&body)?;
    let expected = req.workload.total_rate() * req.duration;
    if expected > MAX_SIMULATED_ARRIVALS {
        return Err(ApiError::new(
            ErrorCode::InvalidSimulation,
            format!("about {expected:.0} arrivals requested, the limit is {MAX_SIMULATED_ARRIVALS}"),
        ));
    }
    let result = tokio::task::spawn_blocking(move || simulate(&req.params, &req.workload, req.duration))
        .await
        .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))??;
    Ok(json_response(to_body(&result)))
}

async fn bpmn_profile(Query(query): Query<HashMap<String, String>>, body: Bytes) -> Result<Response, ApiError> {
    let rate = match query.get("rate") {
        Some(raw) => raw
            .parse::<f64>()
            .map_err(|_| ApiError::malformed(format!("rate `{raw}` is not a number")))?,
        None => return Err(ApiError::malformed("missing query parameter `rate`")),
    };
    let marker = query.get("marker").map_or(DEFAULT_ONCHAIN_MARKER, String::as_str);
    let parsed = parse_bpmn(utf8(&body)?)?;
    let mut profile = build_profile(&parsed.model, rate, marker)?;
    let mut warnings = parsed.warnings;
    warnings.append(&mut profile.warnings);
    profile.warnings = warnings;
    Ok(json_response(to_body(&profile)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RefineRequest {
    profile: String,
    params: ChainParams,
    workload: WorkloadSpec,
}

#[derive(Serialize)]
struct RefineResponse {
    kb_version: u64,
    profile: String,
    saturation_throughput: f64,
    throughput_band: Interval,
    latency_band: Option<Interval>,
    notes: Vec<String>,
}

async fn refine(State(state): State<AppState>, body: Bytes) -> Result<Response, ApiError> {
    let req: RefineRequest = decode(&body)?;
    // refinements are serialized so each builds on the previous snapshot
    let _guard = state.shared.refine.lock().await;
    let kb = state.snapshot();
    let refinement = tokio::task::spawn_blocking(move || {
        let mapping = BTreeMap::from([(req.profile.clone(), req.params)]);
        refine_intervals(&kb, &req.profile, &mapping, &req.workload)
    })
    .await
    .map_err(|e| ApiError::new(ErrorCode::Internal, e.to_string()))??;

    let response = RefineResponse {
        kb_version: refinement.kb.kb_version(),
        profile: refinement.profile,
        saturation_throughput: refinement.saturation_throughput,
        throughput_band: refinement.throughput_band,
        latency_band: refinement.latency_band,
        notes: refinement.notes,
    };
    state.swap(refinement.kb);
    Ok(json_response(to_body(&response)))
}
