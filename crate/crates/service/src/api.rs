//! Read-only JSON API over the current snapshot.

use std::collections::BTreeMap;
use std::sync::Arc;

use axum::extract::{FromRequestParts, Path, Query, State};
use axum::http::request::Parts;
use axum::http::{HeaderMap, HeaderValue, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{any, get, post};
use axum::{Json, Router};
use corpusforge_core::corpus::PaperRecord;
use corpusforge_core::extract::tokenize;
use corpusforge_core::graphs::{
    common_neighbors_for, common_neighbors_prediction, Direction, LinkPrediction, NodeScore,
};
use corpusforge_core::topics::{histogram_by_year, topic_trends, Keyword, TrendTable};
use corpusforge_core::vecsearch::{embed_query, keyword_search, semantic_topk, QueryResult};
use parking_lot::RwLock;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::config::ServiceConfig;
use crate::embedder::{embed_remote, EmbedError};
use crate::error::CliError;
use crate::snapshot::{GraphKind, Metric, Snapshot};

pub const DEFAULT_LIMIT: usize = 50;
const SIMILAR_COUNT: usize = 10;
const SUGGESTION_COUNT: usize = 10;
const TOPIC_KEYWORDS: usize = 10;

pub struct AppState {
    snapshot: RwLock<Option<Arc<Snapshot>>>,
    config: ServiceConfig,
    http: reqwest::Client,
    reload_lock: tokio::sync::Mutex<()>,
}

impl AppState {
    pub fn new(config: ServiceConfig) -> Self {
        AppState {
            snapshot: RwLock::new(None),
            config,
            http: crate::embedder::client(),
            reload_lock: tokio::sync::Mutex::new(()),
        }
    }

    pub fn with_snapshot(config: ServiceConfig, snapshot: Snapshot) -> Self {
        let state = AppState::new(config);
        state.install(snapshot);
        state
    }

    pub fn install(&self, snapshot: Snapshot) {
        *self.snapshot.write() = Some(Arc::new(snapshot));
    }

    pub fn is_ready(&self) -> bool {
        self.snapshot.read().is_some()
    }

    fn current(&self) -> Result<Arc<Snapshot>, ApiError> {
        self.snapshot.read().clone().ok_or_else(|| {
            ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "snapshot is still loading")
        })
    }
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    message: String,
}

impl ApiError {
    fn new(status: StatusCode, message: impl Into<String>) -> Self {
        ApiError {
            status,
            message: message.into(),
        }
    }

    fn bad_request(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, message)
    }

    fn not_found(message: impl Into<String>) -> Self {
        ApiError::new(StatusCode::NOT_FOUND, message)
    }
}

impl From<corpusforge_core::Error> for ApiError {
    fn from(e: corpusforge_core::Error) -> Self {
        use corpusforge_core::Error as E;
        let status = match &e {
            E::UnknownId(_) => StatusCode::NOT_FOUND,
            E::InvalidInput(_)
            | E::UnresolvedKeywords(_)
            | E::DimensionMismatch { .. }
            | E::NoTopicsRemain => StatusCode::BAD_REQUEST,
            _ => StatusCode::INTERNAL_SERVER_ERROR,
        };
        ApiError::new(status, e.to_string())
    }
}

impl From<EmbedError> for ApiError {
    fn from(e: EmbedError) -> Self {
        ApiError::new(StatusCode::BAD_GATEWAY, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(json!({ "error": self.message }))).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// `Query` with JSON rejections.
struct Q<T>(T);

impl<S: Send + Sync, T: DeserializeOwned> FromRequestParts<S> for Q<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        Query::<T>::from_request_parts(parts, state)
            .await
            .map(|Query(v)| Q(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

/// `Path` with JSON rejections.
struct P<T>(T);

impl<S: Send + Sync, T: DeserializeOwned + Send> FromRequestParts<S> for P<T> {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, state: &S) -> Result<Self, ApiError> {
        Path::<T>::from_request_parts(parts, state)
            .await
            .map(|Path(v)| P(v))
            .map_err(|e| ApiError::bad_request(e.body_text()))
    }
}

/// A page of a longer list; the full length goes in `X-Total-Count`.
struct Page<T>(Vec<T>, usize);

impl<T: Serialize> IntoResponse for Page<T> {
    fn into_response(self) -> Response {
        let mut headers = HeaderMap::new();
        headers.insert("x-total-count", HeaderValue::from(self.1));
        (headers, Json(self.0)).into_response()
    }
}

fn paginate<T>(items: Vec<T>, offset: Option<usize>, limit: Option<usize>) -> ApiResult<Page<T>> {
    let limit = limit.unwrap_or(DEFAULT_LIMIT);
    if limit == 0 {
        return Err(ApiError::bad_request("limit must be >= 1"));
    }
    let total = items.len();
    let page = items
        .into_iter()
        .skip(offset.unwrap_or(0))
        .take(limit)
        .collect();
    Ok(Page(page, total))
}

/// Parses a comma-separated list such as `2020,2021`.
fn parse_list<T: std::str::FromStr>(raw: Option<&str>, name: &str) -> ApiResult<Vec<T>> {
    raw.unwrap_or("")
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| ApiError::bad_request(format!("invalid {name} entry {s:?}")))
        })
        .collect()
}

pub fn router(state: Arc<AppState>) -> Router {
    let api = Router::new()
        .route("/api/health", get(health))
        .route("/api/search", get(search))
        .route("/api/papers/{id}", get(paper_detail))
        .route("/api/topics", get(topics))
        .route("/api/topics/{id}/trend", get(topic_trend))
        .route("/api/trends", get(trends))
        .route("/api/map", get(map))
        .route("/api/volume", get(volume))
        .route("/api/graph/centrality", get(centrality))
        .route("/api/graph/predictions", get(predictions))
        .route("/api/admin/reload", post(reload))
        .route("/api/{*rest}", any(no_route));
    let api = match &state.config.ui_dir {
        Some(dir) => api.fallback_service(tower_http::services::ServeDir::new(dir)),
        None => api.fallback(no_route),
    };
    api.with_state(state)
}

async fn no_route() -> ApiError {
    ApiError::not_found("no such route")
}

async fn health(State(state): State<Arc<AppState>>) -> Json<serde_json::Value> {
    Json(json!({ "status": "ok", "ready": state.is_ready() }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchHit {
    pub id: String,
    pub title: String,
    pub year: i32,
    pub venue: String,
    pub score: f64,
}

fn hit(paper: &PaperRecord, score: f64) -> SearchHit {
    SearchHit {
        id: paper.id.clone(),
        title: paper.title.clone(),
        year: paper.year,
        venue: paper.venue.clone(),
        score,
    }
}

fn hits(snap: &Snapshot, results: Vec<QueryResult>) -> Vec<SearchHit> {
    results
        .into_iter()
        .filter_map(|r| snap.paper(&r.paper_id).map(|p| hit(p, r.score)))
        .collect()
}

#[derive(Debug, Deserialize)]
struct SearchParams {
    q: Option<String>,
    mode: Option<String>,
    k: Option<usize>,
    offset: Option<usize>,
    limit: Option<usize>,
}

async fn query_vector(state: &AppState, snap: &Snapshot, q: &str) -> ApiResult<Vec<f32>> {
    let dim = snap.embeddings.dim();
    if let Some(url) = &snap.embedder_url {
        return Ok(embed_remote(&state.http, url, q, dim).await?);
    }
    if snap.word_vectors.dim() != dim {
        return Err(ApiError::bad_request(
            "semantic queries need an embedder for these embeddings; none is configured",
        ));
    }
    Ok(embed_query(q, &snap.word_vectors, &snap.tokenizer)?)
}

async fn search(
    State(state): State<Arc<AppState>>,
    Q(p): Q<SearchParams>,
) -> ApiResult<Page<SearchHit>> {
    let snap = state.current()?;
    let q = p.q.as_deref().map(str::trim).unwrap_or("");
    if q.is_empty() {
        return Err(ApiError::bad_request("missing query parameter q"));
    }
    let k = p.k.unwrap_or(snap.default_k);
    if k == 0 {
        return Err(ApiError::bad_request("k must be >= 1"));
    }
    let results = match p.mode.as_deref().unwrap_or("semantic") {
        "semantic" => {
            let v = query_vector(&state, &snap, q).await?;
            semantic_topk(&v, &snap.embeddings, k)?
        }
        "keyword" => {
            let keywords = tokenize(q, &snap.tokenizer);
            if keywords.is_empty() {
                return Err(ApiError::bad_request("query has no searchable keywords"));
            }
            keyword_search(&keywords, &snap.papers, &snap.word_vectors, k)?
        }
        other => {
            return Err(ApiError::bad_request(format!(
                "unknown mode {other:?}; expected semantic or keyword"
            )))
        }
    };
    paginate(hits(&snap, results), p.offset, p.limit)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Suggestion {
    pub id: String,
    pub score: usize,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PaperDetail {
    pub paper: PaperRecord,
    pub topic_id: i64,
    pub similar: Vec<SearchHit>,
    pub cites: Vec<String>,
    pub cited_by: Vec<String>,
    pub suggestions: Vec<Suggestion>,
}

async fn paper_detail(
    State(state): State<Arc<AppState>>,
    P(id): P<String>,
) -> ApiResult<Json<PaperDetail>> {
    let snap = state.current()?;
    let row = snap
        .paper_index(&id)
        .ok_or_else(|| ApiError::not_found(format!("unknown paper {id:?}")))?;
    let paper = snap.papers[row].clone();
    let query = snap.embeddings.row(row).to_vec();
    let k = (SIMILAR_COUNT + 1).min(snap.papers.len());
    let similar = semantic_topk(&query, &snap.embeddings, k)?
        .into_iter()
        .filter(|r| r.paper_id != id)
        .take(SIMILAR_COUNT)
        .collect();
    let g = &snap.citations;
    let node = g.node_index(&id).expect("citation graph covers all papers");
    let name = |(i, _): &(usize, f64)| g.nodes()[*i].clone();
    let mut cites: Vec<String> = g.out_neighbors(node).iter().map(name).collect();
    let mut cited_by: Vec<String> = g.in_neighbors(node).iter().map(name).collect();
    cites.sort();
    cited_by.sort();
    let suggestions = common_neighbors_for(g, node, SUGGESTION_COUNT)
        .into_iter()
        .map(|p| Suggestion { id: p.v, score: p.score })
        .collect();
    Ok(Json(PaperDetail {
        topic_id: snap.topic_of(&id).unwrap_or(corpusforge_core::topics::NOISE),
        similar: hits(&snap, similar),
        paper,
        cites,
        cited_by,
        suggestions,
    }))
}

#[derive(Debug, Deserialize)]
struct ListParams {
    offset: Option<usize>,
    limit: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TopicSummary {
    pub topic_id: i64,
    pub size: usize,
    pub keywords: Vec<Keyword>,
}

async fn topics(
    State(state): State<Arc<AppState>>,
    Q(p): Q<ListParams>,
) -> ApiResult<Page<TopicSummary>> {
    let snap = state.current()?;
    let list = snap
        .topics
        .topic_sizes
        .iter()
        .zip(&snap.topics.keywords)
        .enumerate()
        .map(|(t, (&size, kw))| TopicSummary {
            topic_id: t as i64,
            size,
            keywords: kw.iter().take(TOPIC_KEYWORDS).cloned().collect(),
        })
        .collect();
    paginate(list, p.offset, p.limit)
}

#[derive(Debug, Deserialize)]
struct TrendParams {
    omit: Option<String>,
    hide: Option<String>,
}

fn trend_table(snap: &Snapshot, p: &TrendParams) -> ApiResult<TrendTable> {
    let omit: Vec<i32> = parse_list(p.omit.as_deref(), "omit")?;
    let hide: Vec<i64> = parse_list(p.hide.as_deref(), "hide")?;
    Ok(topic_trends(&snap.topics, &snap.papers, &omit, &hide)?)
}

async fn trends(
    State(state): State<Arc<AppState>>,
    Q(p): Q<TrendParams>,
) -> ApiResult<Json<TrendTable>> {
    let snap = state.current()?;
    Ok(Json(trend_table(&snap, &p)?))
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TopicTrend {
    pub topic_id: i64,
    pub years: Vec<i32>,
    pub shares: Vec<f64>,
    pub omitted_years: Vec<i32>,
}

async fn topic_trend(
    State(state): State<Arc<AppState>>,
    P(id): P<i64>,
    Q(p): Q<TrendParams>,
) -> ApiResult<Json<TopicTrend>> {
    let snap = state.current()?;
    if id < 0 || id as usize >= snap.topics.topic_count() {
        return Err(ApiError::not_found(format!("unknown topic {id}")));
    }
    let table = trend_table(&snap, &p)?;
    let shares = table
        .topic_series(id)
        .ok_or_else(|| ApiError::bad_request(format!("topic {id} is hidden")))?;
    Ok(Json(TopicTrend {
        topic_id: id,
        years: table.years,
        shares,
        omitted_years: table.omitted_years,
    }))
}

#[derive(Debug, Deserialize)]
struct MapParams {
    dim: Option<usize>,
    offset: Option<usize>,
    limit: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct MapPoint {
    pub id: String,
    pub title: String,
    pub x: f64,
    pub y: f64,
    pub topic_id: i64,
}

async fn map(
    State(state): State<Arc<AppState>>,
    Q(p): Q<MapParams>,
) -> ApiResult<Page<MapPoint>> {
    let snap = state.current()?;
    if p.dim.unwrap_or(2) != 2 {
        return Err(ApiError::bad_request("only dim=2 maps are available"));
    }
    let m = &snap.topics;
    let points = m
        .ids
        .iter()
        .zip(&m.coords2d)
        .zip(&m.labels)
        .map(|((id, xy), &topic_id)| MapPoint {
            id: id.clone(),
            title: snap.paper(id).map(|p| p.title.clone()).unwrap_or_default(),
            x: xy[0],
            y: xy[1],
            topic_id,
        })
        .collect();
    paginate(points, p.offset, p.limit)
}

#[derive(Debug, Deserialize)]
struct VolumeParams {
    bins: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct VolumeResponse {
    pub bins: usize,
    pub edges: Vec<f64>,
    pub counts: BTreeMap<i32, Vec<usize>>,
}

async fn volume(
    State(state): State<Arc<AppState>>,
    Q(p): Q<VolumeParams>,
) -> ApiResult<Json<VolumeResponse>> {
    let snap = state.current()?;
    let bins = p.bins.unwrap_or(snap.volume_bins);
    if bins < 2 {
        return Err(ApiError::bad_request("bins must be >= 2"));
    }
    let snap2 = snap.clone();
    let values = tokio::task::spawn_blocking(move || snap2.projection_1d().map(<[f64]>::to_vec))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e))?;
    let years: Vec<i32> = snap.papers.iter().map(|p| p.year).collect();
    let h = histogram_by_year(&values, &years, bins)?;
    Ok(Json(VolumeResponse {
        bins,
        edges: h.edges,
        counts: h.counts,
    }))
}

#[derive(Debug, Deserialize)]
struct CentralityParams {
    graph: Option<String>,
    metric: Option<String>,
    direction: Option<String>,
    top: Option<usize>,
    offset: Option<usize>,
    limit: Option<usize>,
}

async fn centrality(
    State(state): State<Arc<AppState>>,
    Q(p): Q<CentralityParams>,
) -> ApiResult<Page<NodeScore>> {
    let snap = state.current()?;
    let kind: GraphKind = p
        .graph
        .as_deref()
        .unwrap_or("citation")
        .parse()
        .map_err(ApiError::bad_request)?;
    let metric: Metric = p
        .metric
        .as_deref()
        .ok_or_else(|| ApiError::bad_request("missing query parameter metric"))?
        .parse()
        .map_err(ApiError::bad_request)?;
    let direction: Direction = match p.direction.as_deref() {
        Some(d) => d.parse()?,
        None => Direction::default(),
    };
    let snap2 = snap.clone();
    let scores = tokio::task::spawn_blocking(move || snap2.centrality(kind, metric, direction))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))??;
    let top = p.top.unwrap_or(scores.len());
    let nodes = scores.iter().take(top).cloned().collect();
    paginate(nodes, p.offset, p.limit)
}

#[derive(Debug, Deserialize)]
struct PredictionParams {
    graph: Option<String>,
    top: Option<usize>,
    offset: Option<usize>,
    limit: Option<usize>,
}

async fn predictions(
    State(state): State<Arc<AppState>>,
    Q(p): Q<PredictionParams>,
) -> ApiResult<Page<LinkPrediction>> {
    let snap = state.current()?;
    let kind: GraphKind = p
        .graph
        .as_deref()
        .unwrap_or("citation")
        .parse()
        .map_err(ApiError::bad_request)?;
    let top = p.top.unwrap_or(snap.default_k);
    if top == 0 {
        return Err(ApiError::bad_request("top must be >= 1"));
    }
    let pairs = common_neighbors_prediction(snap.graph(kind), top);
    paginate(pairs, p.offset, p.limit)
}

async fn reload(State(state): State<Arc<AppState>>) -> ApiResult<Json<serde_json::Value>> {
    let _guard = state.reload_lock.lock().await;
    let config = state.config.clone();
    let built = tokio::task::spawn_blocking(move || Snapshot::build(&config))
        .await
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, e.to_string()))?;
    match built {
        Ok(snapshot) => {
            let papers = snapshot.papers.len();
            state.install(snapshot);
            tracing::info!(papers, "snapshot reloaded");
            Ok(Json(json!({ "status": "reloaded", "papers": papers })))
        }
        Err(e) => {
            tracing::error!("reload failed, keeping current snapshot: {e}");
            Err(ApiError::new(
                StatusCode::INTERNAL_SERVER_ERROR,
                format!("reload failed: {e}"),
            ))
        }
    }
}

/// Binds, announces the address, then builds the snapshot in the background.
/// Requests get 503 until the snapshot is ready; a failed initial build
/// stops the server.
pub async fn serve(config: ServiceConfig) -> Result<(), CliError> {
    config.validate()?;
    let listener = tokio::net::TcpListener::bind(config.listen)
        .await
        .map_err(|e| CliError::Input(format!("cannot bind {}: {e}", config.listen)))?;
    let addr = listener
        .local_addr()
        .map_err(|e| CliError::Internal(e.to_string()))?;
    println!("listening on http://{addr}");

    let state = Arc::new(AppState::new(config.clone()));
    let (fail_tx, fail_rx) = tokio::sync::oneshot::channel::<CliError>();
    let loader = state.clone();
    tokio::spawn(async move {
        let built = tokio::task::spawn_blocking(move || Snapshot::build(&config)).await;
        match built {
            Ok(Ok(snapshot)) => {
                tracing::info!(papers = snapshot.papers.len(), "snapshot ready");
                loader.install(snapshot);
            }
            Ok(Err(e)) => {
                let _ = fail_tx.send(e);
            }
            Err(e) => {
                let _ = fail_tx.send(CliError::Internal(e.to_string()));
            }
        }
    });

    let failure = Arc::new(parking_lot::Mutex::new(None));
    let slot = failure.clone();
    let shutdown = async move {
        tokio::select! {
            _ = tokio::signal::ctrl_c() => tracing::info!("shutting down"),
            Ok(e) = fail_rx => {
                tracing::error!("snapshot build failed: {e}");
                *slot.lock() = Some(e);
            }
        }
    };
    axum::serve(listener, router(state))
        .with_graceful_shutdown(shutdown)
        .await
        .map_err(|e| CliError::Internal(e.to_string()))?;
    let outcome = failure.lock().take();
    match outcome {
        Some(e) => Err(e),
        None => Ok(()),
    }
}
