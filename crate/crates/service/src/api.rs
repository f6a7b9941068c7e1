//! Routes. Request bodies are parsed by hand so that malformed JSON maps to
//! 400 while well-formed requests with out-of-domain values map to 422.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{HeaderValue, Method};
use axum::routing::{get, post};
use axum::{Json, Router};
use screening_core::tables::{surface_grid, AxisRange, ReferenceTableSpec};
use screening_core::{
    generate_reference_table, iterations_needed, iterations_needed_log_lr, npv, npv_curve, ppv,
    ppv_curve, prevalence_threshold, sequential_ppv, unit_grid, IterationPlan, Prior,
    ScreeningError, SurfacePoint, TestProfile, TestResult,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use tower_http::cors::CorsLayer;
use tower_http::services::ServeDir;

use crate::config::ServiceConfig;
use crate::error::ApiError;
use crate::openapi;
use crate::session::{SessionStore, SessionView};

pub const DEFAULT_CURVE_POINTS: usize = 200;
const MAX_CURVE_POINTS: usize = 100_000;

pub struct AppState {
    pub sessions: SessionStore,
}

type Shared = State<Arc<AppState>>;
type ApiResult<T> = Result<Json<T>, ApiError>;

fn parse<T: DeserializeOwned>(body: &Bytes) -> Result<T, ApiError> {
    serde_json::from_slice(body).map_err(|e| ApiError::bad_request(e.to_string()))
}

pub fn router(state: Arc<AppState>, config: &ServiceConfig) -> Router {
    let api = Router::new()
        .route("/api/ppv", post(post_ppv))
        .route("/api/npv", post(post_npv))
        .route("/api/threshold", post(post_threshold))
        .route("/api/iterations", post(post_iterations))
        .route("/api/sequential-ppv", post(post_sequential_ppv))
        .route("/api/curve", post(post_curve))
        .route("/api/table", post(post_table))
        .route("/api/surface", post(post_surface))
        .route("/api/session", post(create_session))
        .route("/api/session/{id}", get(get_session))
        .route(
            "/api/session/{id}/result",
            post(post_result).delete(undo_result),
        )
        .route("/api/spec", get(|| async { Json(openapi::document()) }))
        .route("/health", get(|| async { "ok" }))
        .with_state(state);

    let api = match &config.static_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    };
    match config
        .cors_origin
        .as_deref()
        .and_then(|o| HeaderValue::from_str(o).ok())
    {
        Some(origin) => api.layer(
            CorsLayer::new()
                .allow_origin(origin)
                .allow_methods([Method::GET, Method::POST, Method::DELETE])
                .allow_headers([axum::http::header::CONTENT_TYPE]),
        ),
        None => api,
    }
}

/// `sens`/`spec` with long-form aliases.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TestInput {
    #[serde(alias = "sensitivity")]
    pub sens: f64,
    #[serde(alias = "specificity")]
    pub spec: f64,
}

impl TestInput {
    fn profile(&self) -> Result<TestProfile, ScreeningError> {
        TestProfile::new(self.sens, self.spec)
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PredictiveRequest {
    #[serde(flatten)]
    pub test: TestInput,
    #[serde(alias = "prior")]
    pub prev: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ValueResponse<R> {
    #[serde(flatten)]
    pub request: R,
    pub value: f64,
}

async fn post_ppv(body: Bytes) -> ApiResult<ValueResponse<PredictiveRequest>> {
    let req: PredictiveRequest = parse(&body)?;
    let value = ppv(&req.test.profile()?, Prior::new(req.prev)?)?.value;
    Ok(Json(ValueResponse {
        request: req,
        value,
    }))
}

async fn post_npv(body: Bytes) -> ApiResult<ValueResponse<PredictiveRequest>> {
    let req: PredictiveRequest = parse(&body)?;
    let value = npv(&req.test.profile()?, Prior::new(req.prev)?)?.value;
    Ok(Json(ValueResponse {
        request: req,
        value,
    }))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ThresholdResponse {
    #[serde(flatten)]
    pub request: TestInput,
    pub value: f64,
    pub epsilon: f64,
}

async fn post_threshold(body: Bytes) -> ApiResult<ThresholdResponse> {
    let req: TestInput = parse(&body)?;
    let test = req.profile()?;
    Ok(Json(ThresholdResponse {
        request: req,
        value: prevalence_threshold(&test)?,
        epsilon: test.epsilon(),
    }))
}

/// Either `sens`+`spec` or `log_lr`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IterationsRequest {
    #[serde(
        default,
        alias = "sensitivity",
        skip_serializing_if = "Option::is_none"
    )]
    pub sens: Option<f64>,
    #[serde(
        default,
        alias = "specificity",
        skip_serializing_if = "Option::is_none"
    )]
    pub spec: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub log_lr: Option<f64>,
    #[serde(alias = "prior")]
    pub prev: f64,
    #[serde(alias = "target_rho")]
    pub target: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IterationsResponse {
    #[serde(flatten)]
    pub request: IterationsRequest,
    #[serde(flatten)]
    pub plan: IterationPlan,
}

async fn post_iterations(body: Bytes) -> ApiResult<IterationsResponse> {
    let req: IterationsRequest = parse(&body)?;
    let prior = Prior::new(req.prev)?;
    let plan = match (req.sens, req.spec, req.log_lr) {
        (Some(a), Some(b), None) => iterations_needed(&TestProfile::new(a, b)?, prior, req.target)?,
        (None, None, Some(log_lr)) => iterations_needed_log_lr(log_lr, prior, req.target)?,
        _ => {
            return Err(ApiError::bad_request(
                "give either both sens and spec, or log_lr",
            ))
        }
    };
    Ok(Json(IterationsResponse { request: req, plan }))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SequentialRequest {
    #[serde(flatten)]
    pub test: TestInput,
    #[serde(alias = "prior")]
    pub prev: f64,
    pub n: u64,
}

async fn post_sequential_ppv(body: Bytes) -> ApiResult<ValueResponse<SequentialRequest>> {
    let req: SequentialRequest = parse(&body)?;
    let value = sequential_ppv(&req.test.profile()?, Prior::new(req.prev)?, req.n)?;
    Ok(Json(ValueResponse {
        request: req,
        value,
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CurveKind {
    Ppv,
    Npv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveRequest {
    pub kind: CurveKind,
    #[serde(flatten)]
    pub test: TestInput,
    /// Evenly spaced points on [0, 1]; ignored when `grid` is given.
    #[serde(default)]
    pub points: Option<usize>,
    #[serde(default)]
    pub grid: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub phi: f64,
    pub value: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CurveResponse {
    pub kind: CurveKind,
    pub sens: f64,
    pub spec: f64,
    pub threshold: Option<f64>,
    pub points: Vec<CurvePoint>,
}

async fn post_curve(body: Bytes) -> ApiResult<CurveResponse> {
    let req: CurveRequest = parse(&body)?;
    let test = req.test.profile()?;
    let grid = match req.grid {
        Some(g) => g,
        None => {
            let n = req.points.unwrap_or(DEFAULT_CURVE_POINTS);
            if n > MAX_CURVE_POINTS {
                return Err(ApiError::bad_request(format!(
                    "at most {MAX_CURVE_POINTS} points"
                )));
            }
            unit_grid(n)
        }
    };
    let pairs = match req.kind {
        CurveKind::Ppv => ppv_curve(&test, &grid)?,
        CurveKind::Npv => npv_curve(&test, &grid)?,
    };
    Ok(Json(CurveResponse {
        kind: req.kind,
        sens: req.test.sens,
        spec: req.test.spec,
        threshold: prevalence_threshold(&test).ok(),
        points: pairs
            .into_iter()
            .map(|(phi, value)| CurvePoint { phi, value })
            .collect(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axes {
    #[default]
    Paper,
    Custom,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TableRequest {
    #[serde(alias = "target_rho")]
    pub target: f64,
    #[serde(default)]
    pub axes: Axes,
    #[serde(default)]
    pub log_lr_values: Option<Vec<f64>>,
    #[serde(default)]
    pub phi_values: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TableResponse {
    pub target_rho: f64,
    pub log_lr_values: Vec<f64>,
    pub phi_values: Vec<f64>,
    /// Raw iteration counts, rows by ln LR+.
    pub cells: Vec<Vec<f64>>,
    pub ceiled: Vec<Vec<u64>>,
}

async fn post_table(body: Bytes) -> ApiResult<TableResponse> {
    let req: TableRequest = parse(&body)?;
    let spec = match req.axes {
        Axes::Paper => ReferenceTableSpec::standard(req.target)?,
        Axes::Custom => {
            let (Some(rows), Some(cols)) = (req.log_lr_values, req.phi_values) else {
                return Err(ApiError::bad_request(
                    "custom axes need log_lr_values and phi_values",
                ));
            };
            ReferenceTableSpec::new(req.target, rows, cols)?
        }
    };
    let table = generate_reference_table(&spec)?;
    let ceiled = table.ceiled();
    Ok(Json(TableResponse {
        target_rho: spec.target_rho,
        log_lr_values: spec.log_lr_values,
        phi_values: spec.phi_values,
        cells: table.cells,
        ceiled,
    }))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SurfaceRequest {
    #[serde(alias = "target_rho")]
    pub target: f64,
    pub log_lr: AxisRange,
    pub phi: AxisRange,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct SurfaceResponse {
    pub target_rho: f64,
    pub points: Vec<SurfacePoint>,
}

async fn post_surface(body: Bytes) -> ApiResult<SurfaceResponse> {
    let req: SurfaceRequest = parse(&body)?;
    let points = surface_grid(req.target, req.log_lr, req.phi)?;
    Ok(Json(SurfaceResponse {
        target_rho: req.target,
        points,
    }))
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CreateSession {
    #[serde(flatten)]
    pub test: TestInput,
    #[serde(alias = "prev")]
    pub prior: f64,
    #[serde(default, alias = "target_rho")]
    pub target: Option<f64>,
}

async fn create_session(State(state): Shared, body: Bytes) -> ApiResult<SessionView> {
    let req: CreateSession = parse(&body)?;
    let view = state
        .sessions
        .create(req.test.profile()?, Prior::new(req.prior)?, req.target)?;
    Ok(Json(view))
}

async fn get_session(State(state): Shared, Path(id): Path<String>) -> ApiResult<SessionView> {
    state.sessions.get(&id).map(Json)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ResultRequest {
    pub result: TestResult,
}

async fn post_result(
    State(state): Shared,
    Path(id): Path<String>,
    body: Bytes,
) -> ApiResult<SessionView> {
    let req: ResultRequest = parse(&body)?;
    state.sessions.push_result(&id, req.result).map(Json)
}

async fn undo_result(State(state): Shared, Path(id): Path<String>) -> ApiResult<SessionView> {
    state.sessions.undo(&id).map(Json)
}
