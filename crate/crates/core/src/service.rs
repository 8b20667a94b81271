//! HTTP service for the rating apparatus: scenario playback data, model
//! traces and append-only rating storage.

use std::collections::{BTreeMap, HashMap};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path as UrlPath, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use tower_http::services::ServeDir;

use crate::cli::{load_trace, ServeArgs};
use crate::config::Config;
use crate::engine::{run_scenario, Model};
use crate::error::{Error, Result};
use crate::metrics::{downsample_hold, normalize_risk, RatingFile, RatingSample, RatingTrace};
use crate::scenario::{Population, ScenarioTrace, VehicleState};

/// Server-side rating sample period (s).
pub const RATING_DT: f64 = 0.1;

#[derive(Debug, Clone, Serialize)]
pub struct SessionRecord {
    pub session_id: String,
    pub rater_id: String,
    pub scenario_id: String,
    pub population: Population,
    pub started_at: String,
    pub rating: Option<RatingTrace>,
    pub completed: bool,
}

pub struct AppState {
    scenarios: BTreeMap<String, ScenarioTrace>,
    data_dir: PathBuf,
    config: Config,
    sessions: Mutex<HashMap<String, SessionRecord>>,
    risk_cache: Mutex<HashMap<(String, Population, Model), Vec<f64>>>,
}

impl AppState {
    /// Load every `*.json` scenario under `scenarios_dir`.
    pub fn load(scenarios_dir: &Path, data_dir: &Path, config: Config) -> Result<Self> {
        let entries = std::fs::read_dir(scenarios_dir).map_err(|e| Error::io(scenarios_dir, e))?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        let mut scenarios = BTreeMap::new();
        for p in paths {
            let trace = load_trace(&p, &config)?;
            scenarios.insert(trace.id.clone(), trace);
        }
        std::fs::create_dir_all(data_dir).map_err(|e| Error::io(data_dir, e))?;
        Ok(Self {
            scenarios,
            data_dir: data_dir.to_path_buf(),
            config,
            sessions: Mutex::new(HashMap::new()),
            risk_cache: Mutex::new(HashMap::new()),
        })
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    code: &'static str,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            status,
            code,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "bad_request", message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }
}

impl From<Error> for ApiError {
    fn from(e: Error) -> Self {
        if e.is_io() {
            Self::new(StatusCode::INTERNAL_SERVER_ERROR, "io_error", e.to_string())
        } else {
            Self::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid", e.to_string())
        }
    }
}

impl From<JsonRejection> for ApiError {
    fn from(e: JsonRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl From<QueryRejection> for ApiError {
    fn from(e: QueryRejection) -> Self {
        Self::bad_request(e.body_text())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({ "error": { "code": self.code, "message": self.message } });
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = std::result::Result<T, ApiError>;
type Shared = Arc<AppState>;

pub fn router(state: Shared, ui_dir: Option<&Path>) -> Router {
    let api = Router::new()
        .route("/api/scenarios", get(list_scenarios))
        .route("/api/scenarios/{id}/frames", get(scenario_frames))
        .route("/api/scenarios/{id}/risk", get(scenario_risk))
        .route("/api/sessions", post(create_session))
        .route("/api/sessions/{id}/ratings", post(upload_ratings))
        .route("/api/ratings", get(list_ratings))
        .fallback(|| async { ApiError::not_found("no such endpoint") })
        .with_state(state);
    match ui_dir {
        Some(dir) => api.fallback_service(ServeDir::new(dir)),
        None => api,
    }
}

/// Bind and run until interrupted.
pub fn serve(args: &ServeArgs, cfg: &Config) -> Result<()> {
    let state = Arc::new(AppState::load(&args.scenarios, &args.data, *cfg)?);
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::Invalid(format!("cannot start runtime: {e}")))?;
    rt.block_on(async move {
        let addr = format!("{}:{}", args.host, args.port);
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| Error::Invalid(format!("cannot bind {addr}: {e}")))?;
        eprintln!("serving on http://{addr}");
        axum::serve(listener, router(state, args.ui.as_deref()))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| Error::Invalid(format!("server error: {e}")))
    })
}

fn scenario<'a>(state: &'a AppState, id: &str) -> ApiResult<&'a ScenarioTrace> {
    state
        .scenarios
        .get(id)
        .ok_or_else(|| ApiError::not_found(format!("unknown scenario `{id}`")))
}

fn parse_population(raw: Option<&str>, default: Population) -> ApiResult<Population> {
    match raw {
        None => Ok(default),
        Some(s) => s.parse().map_err(|e: Error| ApiError::bad_request(e.to_string())),
    }
}

async fn list_scenarios(State(state): State<Shared>) -> Json<Value> {
    let list: Vec<Value> = state
        .scenarios
        .values()
        .map(|t| {
            json!({
                "id": t.id,
                "duration": t.duration(),
                "dt": t.dt,
                "frames": t.len(),
                "risk_label": t.risk_label,
                "populations": Population::ALL,
            })
        })
        .collect();
    Json(Value::Array(list))
}

#[derive(Debug, Deserialize)]
struct PopulationQuery {
    population: Option<String>,
    model: Option<String>,
}

fn vehicle_json(s: &VehicleState) -> Value {
    json!({
        "x": s.x, "y": s.y, "heading": s.heading,
        "v_lon": s.v_lon, "v_lat": s.v_lat,
        "length": s.length, "width": s.width,
    })
}

async fn scenario_frames(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    query: std::result::Result<Query<PopulationQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let Query(q) = query?;
    let trace = scenario(&state, &id)?;
    let population = parse_population(q.population.as_deref(), trace.population)?;
    let ids = trace.visible_actor_ids(population);
    let frames: Vec<Value> = (0..trace.len())
        .map(|i| {
            let actors: serde_json::Map<String, Value> = ids
                .iter()
                .map(|a| (a.to_string(), vehicle_json(&trace.actors[*a][i])))
                .collect();
            json!({ "t": trace.ego[i].t, "ego": vehicle_json(&trace.ego[i]), "actors": actors })
        })
        .collect();
    Ok(Json(json!({
        "id": trace.id,
        "dt": trace.dt,
        "population": population,
        "cutin_actor": trace.cutin_actor,
        "road": {
            "lane_count": trace.road.lane_count,
            "lane_width": trace.road.lane_width,
            "ego_lane_index": trace.road.ego_lane_index,
            "road_length": trace.road.road_length,
        },
        "static_objects": trace.visible_static_objects(population),
        "frames": frames,
    })))
}

async fn scenario_risk(
    State(state): State<Shared>,
    UrlPath(id): UrlPath<String>,
    query: std::result::Result<Query<PopulationQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let Query(q) = query?;
    let trace = scenario(&state, &id)?;
    let population = parse_population(q.population.as_deref(), trace.population)?;
    let model: Model = q
        .model
        .as_deref()
        .unwrap_or("avor")
        .parse()
        .map_err(|e: Error| ApiError::bad_request(e.to_string()))?;

    let key = (id.clone(), population, model);
    let cached = state.risk_cache.lock().unwrap().get(&key).cloned();
    let raw = match cached {
        Some(v) => v,
        None => {
            let st = state.clone();
            let values = tokio::task::spawn_blocking(move || {
                let tr = st.scenarios[&id].with_population(population);
                run_scenario(&tr, &[model], &st.config.engine_params())
                    .map(|mut out| out.remove(0).value)
            })
            .await
            .map_err(|e| {
                ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string())
            })??;
            state.risk_cache.lock().unwrap().insert(key, values.clone());
            values
        }
    };
    let np = state.config.metrics.normalize_params(state.config.metrics.c_bar);
    let normalized = normalize_risk(&raw, &np).ok();
    Ok(Json(json!({
        "scenario_id": trace.id,
        "model": model,
        "population": population,
        "t": trace.times(),
        "raw": raw,
        "normalized": normalized,
    })))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NewSession {
    rater_id: String,
    scenario_id: String,
    population: Population,
}

async fn create_session(
    State(state): State<Shared>,
    body: std::result::Result<Json<NewSession>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let Json(req) = body?;
    scenario(&state, &req.scenario_id)?;
    if req.rater_id.trim().is_empty() {
        return Err(ApiError::bad_request("rater_id must not be empty"));
    }
    let record = SessionRecord {
        session_id: uuid::Uuid::new_v4().to_string(),
        rater_id: req.rater_id,
        scenario_id: req.scenario_id,
        population: req.population,
        started_at: chrono::Utc::now().to_rfc3339(),
        rating: None,
        completed: false,
    };
    let body = json!({
        "session_id": record.session_id,
        "started_at": record.started_at,
        "scenario_id": record.scenario_id,
        "population": record.population,
    });
    state
        .sessions
        .lock()
        .unwrap()
        .insert(record.session_id.clone(), record);
    Ok((StatusCode::CREATED, Json(body)))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RatingUpload {
    samples: Vec<RatingSample>,
}

fn file_token(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

/// Write `bytes` to a new file; never replaces an existing one.
fn write_new(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut f = std::fs::OpenOptions::new()
        .write(true)
        .create_new(true)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    f.write_all(bytes)
        .and_then(|_| f.sync_all())
        .map_err(|e| Error::io(path, e))
}

async fn upload_ratings(
    State(state): State<Shared>,
    UrlPath(session_id): UrlPath<String>,
    body: std::result::Result<Json<RatingUpload>, JsonRejection>,
) -> ApiResult<(StatusCode, Json<Value>)> {
    let Json(upload) = body?;
    let session = state
        .sessions
        .lock()
        .unwrap()
        .get(&session_id)
        .cloned()
        .ok_or_else(|| ApiError::not_found(format!("unknown session `{session_id}`")))?;
    if session.completed {
        return Err(ApiError::new(
            StatusCode::CONFLICT,
            "session_completed",
            "ratings for this session were already stored",
        ));
    }
    if upload.samples.is_empty() {
        return Err(ApiError::bad_request("a rating needs at least one sample"));
    }
    let dense = RatingTrace {
        rater_id: session.rater_id.clone(),
        scenario_id: session.scenario_id.clone(),
        population: session.population,
        t: upload.samples.iter().map(|s| s.t).collect(),
        srr: upload.samples.iter().map(|s| s.srr).collect(),
    };
    dense
        .validate()
        .map_err(|e| ApiError::bad_request(e.to_string()))?;
    let rating = downsample_hold(&dense, RATING_DT);

    let mut file = rating.to_file();
    file.session_id = Some(session.session_id.clone());
    file.started_at = Some(session.started_at.clone());
    let bytes = serde_json::to_vec_pretty(&file)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
    let name = format!(
        "{}_{}_{}_{}.json",
        file_token(&session.scenario_id),
        file_token(session.population.as_str()),
        file_token(&session.rater_id),
        session.session_id
    );
    let path = state.data_dir.join(&name);
    let n = rating.t.len();
    {
        let mut sessions = state.sessions.lock().unwrap();
        let rec = sessions.get_mut(&session_id).expect("session exists");
        if rec.completed {
            return Err(ApiError::new(
                StatusCode::CONFLICT,
                "session_completed",
                "ratings for this session were already stored",
            ));
        }
        write_new(&path, &bytes)?;
        rec.rating = Some(rating);
        rec.completed = true;
    }
    Ok((
        StatusCode::CREATED,
        Json(json!({ "session_id": session_id, "file": name, "samples": n })),
    ))
}

#[derive(Debug, Deserialize)]
struct RatingsQuery {
    scenario: Option<String>,
}

async fn list_ratings(
    State(state): State<Shared>,
    query: std::result::Result<Query<RatingsQuery>, QueryRejection>,
) -> ApiResult<Json<Value>> {
    let Query(q) = query?;
    let dir = state.data_dir.clone();
    let ratings = tokio::task::spawn_blocking(move || -> Result<Vec<RatingFile>> {
        let entries = std::fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))?;
        let mut paths: Vec<PathBuf> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();
        paths.iter().map(|p| RatingFile::load(p)).collect()
    })
    .await
    .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))??;
    let list: Vec<_> = ratings
        .into_iter()
        .filter(|r| q.scenario.as_ref().is_none_or(|s| *s == r.scenario_id))
        .collect();
    Ok(Json(serde_json::to_value(list).unwrap_or(Value::Null)))
}
