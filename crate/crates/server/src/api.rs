//! HTTP and server-sent-event endpoints.

use std::collections::BTreeMap;
use std::convert::Infallible;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::sse::{Event as SseEvent, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cpcboard_core::analytics::QueryError;
use cpcboard_core::query::run_query;
use cpcboard_core::search_space::{space_from_json, space_to_json, Violation};
use cpcboard_core::{
    compute_layout, export_svg, leaderboard, parse_expansion, ExpansionState, LayoutError,
    SearchConfig, SearchSpace,
};
use futures::{Stream, StreamExt};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value as JsonValue};

use crate::registry::{Pacing, Registry, RegistryError};

pub const MAX_SVG_SIDE: u32 = 10_000;

pub fn router(registry: Registry) -> Router {
    Router::new()
        .route("/runs", post(create_run).get(list_runs))
        .route("/runs/{id}", get(run_summary))
        .route("/runs/{id}/snapshot", get(snapshot))
        .route("/runs/{id}/layout", get(layout))
        .route("/runs/{id}/leaderboard", get(leaderboard_rows))
        .route("/runs/{id}/query/{name}", get(query))
        .route("/runs/{id}/events", get(events))
        .route("/runs/{id}/export.svg", get(svg))
        .with_state(registry)
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
    violations: Vec<Violation>,
}

impl ApiError {
    fn new(status: StatusCode, message: impl ToString) -> Self {
        Self {
            status,
            message: message.to_string(),
            violations: Vec::new(),
        }
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({"error": self.message});
        if !self.violations.is_empty() {
            body["violations"] = json!(self.violations);
        }
        (self.status, Json(body)).into_response()
    }
}

impl From<RegistryError> for ApiError {
    fn from(e: RegistryError) -> Self {
        match e {
            RegistryError::UnknownRun(_) => ApiError::new(StatusCode::NOT_FOUND, e),
            RegistryError::Space(violations) => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                message: "invalid search space".into(),
                violations,
            },
            RegistryError::Config(_) | RegistryError::Pacing => {
                ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, e)
            }
            RegistryError::Io { .. } => ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e),
        }
    }
}

impl From<LayoutError> for ApiError {
    fn from(e: LayoutError) -> Self {
        let status = match e {
            LayoutError::EmptySnapshot => StatusCode::CONFLICT,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e)
    }
}

impl From<QueryError> for ApiError {
    fn from(e: QueryError) -> Self {
        let status = match e {
            QueryError::UnknownQuery(_) => StatusCode::NOT_FOUND,
            QueryError::EmptySnapshot | QueryError::InsufficientData { .. } => StatusCode::CONFLICT,
            _ => StatusCode::BAD_REQUEST,
        };
        ApiError::new(status, e)
    }
}

/// Search settings; missing fields take the 24-candidate defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigBody {
    pub seed: Option<u64>,
    pub n_structure: Option<usize>,
    pub n_refine: Option<usize>,
    pub top_k: Option<usize>,
    pub step_scale: Option<f64>,
}

impl ConfigBody {
    pub fn resolve(&self) -> SearchConfig {
        let d = SearchConfig::with_seed(self.seed.unwrap_or(0));
        SearchConfig {
            seed: d.seed,
            n_structure: self.n_structure.unwrap_or(d.n_structure),
            n_refine: self.n_refine.unwrap_or(d.n_refine),
            top_k: self.top_k.unwrap_or(d.top_k),
            step_scale: self.step_scale.unwrap_or(d.step_scale),
        }
    }
}

/// `POST /runs` body. Without `space` the bundled default space is used.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartRun {
    pub space: Option<JsonValue>,
    #[serde(default)]
    pub config: ConfigBody,
    #[serde(default)]
    pub pacing: Pacing,
}

async fn create_run(
    State(registry): State<Registry>,
    body: Result<Json<StartRun>, JsonRejection>,
) -> Result<(StatusCode, Json<JsonValue>), ApiError> {
    let Json(body) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, e.body_text()))?;
    let space = match &body.space {
        None => SearchSpace::bundled_default(),
        Some(doc) => space_from_json(doc).map_err(|e| match e {
            cpcboard_core::SpaceError::Validation(violations) => ApiError {
                status: StatusCode::UNPROCESSABLE_ENTITY,
                message: "invalid search space".into(),
                violations,
            },
            other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, other),
        })?,
    };
    let run_id = registry.start_run(space, body.config.resolve(), body.pacing)?;
    Ok((StatusCode::CREATED, Json(json!({"run_id": run_id}))))
}

async fn list_runs(State(registry): State<Registry>) -> Json<JsonValue> {
    Json(json!(registry.list()))
}

async fn run_summary(
    State(registry): State<Registry>,
    Path(id): Path<String>,
) -> Result<Json<JsonValue>, ApiError> {
    Ok(Json(json!(registry.summary(&id)?)))
}

#[derive(Debug, Deserialize)]
struct SinceParams {
    since: Option<u64>,
}

/// Wire form of a snapshot or a delta.
#[derive(Debug, Serialize)]
struct SnapshotBody {
    run_id: String,
    status: cpcboard_core::search::RunStatus,
    space: JsonValue,
    config: SearchConfig,
    since: u64,
    /// Highest seq included in this view.
    seq: u64,
    candidates: Vec<cpcboard_core::PipelineCandidate>,
}

async fn snapshot(
    State(registry): State<Registry>,
    Path(id): Path<String>,
    Query(params): Query<SinceParams>,
) -> Result<Json<SnapshotBody>, ApiError> {
    let since = params.since.unwrap_or(0);
    let s = registry.snapshot(&id, Some(since))?;
    let seq = s.candidates.last().map_or(since, |c| c.seq);
    Ok(Json(SnapshotBody {
        run_id: s.run_id,
        status: s.status,
        space: space_to_json(&s.space),
        config: s.config,
        since,
        seq,
        candidates: s.candidates,
    }))
}

#[derive(Debug, Deserialize)]
struct ExpansionParams {
    #[serde(default)]
    expanded: String,
    w: Option<u32>,
    h: Option<u32>,
}

fn expansion(text: &str) -> Result<ExpansionState, ApiError> {
    parse_expansion(text).map_err(ApiError::from)
}

async fn layout(
    State(registry): State<Registry>,
    Path(id): Path<String>,
    Query(params): Query<ExpansionParams>,
) -> Result<Json<cpcboard_core::CpcLayout>, ApiError> {
    let snap = registry.snapshot(&id, None)?;
    Ok(Json(compute_layout(&snap, &expansion(&params.expanded)?)?))
}

async fn leaderboard_rows(
    State(registry): State<Registry>,
    Path(id): Path<String>,
) -> Result<Json<Vec<cpcboard_core::LeaderboardRow>>, ApiError> {
    Ok(Json(leaderboard(&registry.snapshot(&id, None)?)))
}

async fn query(
    State(registry): State<Registry>,
    Path((id, name)): Path<(String, String)>,
    Query(params): Query<BTreeMap<String, String>>,
) -> Result<Json<JsonValue>, ApiError> {
    let snap = registry.snapshot(&id, None)?;
    Ok(Json(run_query(&snap, &name, &params)?))
}

#[derive(Debug, Deserialize)]
struct EventParams {
    from: Option<u64>,
}

/// SSE stream starting after `from`, or after the `Last-Event-ID` header on
/// reconnect. Each event's id is its seq.
async fn events(
    State(registry): State<Registry>,
    Path(id): Path<String>,
    Query(params): Query<EventParams>,
    headers: HeaderMap,
) -> Result<Sse<impl Stream<Item = Result<SseEvent, Infallible>>>, ApiError> {
    let last_event_id = headers
        .get("last-event-id")
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.trim().parse::<u64>().ok());
    let from = params.from.or(last_event_id).unwrap_or(0);
    let stream = registry.subscribe(&id, from)?.map(|event| {
        Ok(SseEvent::default()
            .event(event.kind.as_str())
            .id(event.seq.to_string())
            .data(serde_json::to_string(&event).expect("event serializes")))
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

async fn svg(
    State(registry): State<Registry>,
    Path(id): Path<String>,
    Query(params): Query<ExpansionParams>,
) -> Result<Response, ApiError> {
    let (w, h) = (params.w.unwrap_or(1200), params.h.unwrap_or(600));
    if !(1..=MAX_SVG_SIDE).contains(&w) || !(1..=MAX_SVG_SIDE).contains(&h) {
        return Err(ApiError::new(
            StatusCode::BAD_REQUEST,
            format!("w and h must be in 1..={MAX_SVG_SIDE}"),
        ));
    }
    let snap = registry.snapshot(&id, None)?;
    let body = export_svg(&snap, &expansion(&params.expanded)?, w, h)?;
    Ok(([(header::CONTENT_TYPE, "image/svg+xml")], body).into_response())
}
