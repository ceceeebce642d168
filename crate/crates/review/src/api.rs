use std::collections::BTreeMap;

use axum::extract::rejection::{JsonRejection, QueryRejection};
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use serde::{Deserialize, Serialize};
use serde_json::json;
use spamtax_core::corpus::{save_dataset, DatasetManifest};
use spamtax_core::wardcluster::{apply_labels, summarize, ClusterCut};

use crate::error::ReviewError;
use crate::session::{Action, ReviewSession};
use crate::state::AppState;

pub const EXCERPT_CHARS: usize = 2000;
pub const DEFAULT_PAGE_SIZE: usize = 20;
pub const MAX_PAGE_SIZE: usize = 200;
const TOP_TERMS: usize = 15;
const SAMPLE_DOCS: usize = 5;

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    error: &'static str,
    detail: String,
    unlabeled: Option<Vec<usize>>,
}

impl ApiError {
    fn new(status: StatusCode, error: &'static str, detail: impl Into<String>) -> Self {
        ApiError { status, error, detail: detail.into(), unlabeled: None }
    }

    fn bad_request(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "validation", detail)
    }

    fn not_found(detail: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", detail)
    }
}

impl From<ReviewError> for ApiError {
    fn from(e: ReviewError) -> Self {
        match e {
            ReviewError::Core(spamtax_core::Error::InvalidK { .. }) => Self::bad_request(e.to_string()),
            other => Self::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", other.to_string()),
        }
    }
}

impl From<spamtax_core::Error> for ApiError {
    fn from(e: spamtax_core::Error) -> Self {
        ReviewError::from(e).into()
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
        let mut body = json!({ "error": self.error, "detail": self.detail });
        if let Some(ids) = self.unlabeled {
            body["unlabeled"] = json!(ids);
        }
        (self.status, Json(body)).into_response()
    }
}

type ApiResult<T> = Result<Json<T>, ApiError>;

#[derive(Debug, Serialize, Deserialize)]
pub struct ClusterView {
    pub id: usize,
    pub size: usize,
    pub top_terms: Vec<(String, f64)>,
    pub sample_doc_ids: Vec<String>,
    pub label: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ClustersResponse {
    pub k: usize,
    pub clusters: Vec<ClusterView>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DocExcerpt {
    pub id: String,
    pub text: String,
    pub truncated: bool,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DocsPage {
    pub cluster: usize,
    pub page: usize,
    pub page_size: usize,
    pub total: usize,
    pub docs: Vec<DocExcerpt>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ExportResponse {
    pub path: String,
    pub manifest: DatasetManifest,
    pub percentages: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
struct KQuery {
    k: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct PageQuery {
    page: Option<usize>,
    page_size: Option<usize>,
}

#[derive(Debug, Deserialize)]
struct LabelBody {
    cluster: usize,
    label: Option<String>,
}

#[derive(Debug, Deserialize)]
struct CutBody {
    k: usize,
}

pub fn router(state: AppState) -> Router {
    Router::new()
        .route("/api/dendrogram", get(dendrogram))
        .route("/api/clusters", get(clusters))
        .route("/api/cluster/{id}/docs", get(cluster_docs))
        .route("/api/labels", post(set_label))
        .route("/api/cut", post(set_cut))
        .route("/api/export", post(export))
        .route("/api/session", get(session))
        .with_state(state)
}

fn current_cut(state: &AppState, k: usize) -> Result<ClusterCut, ApiError> {
    Ok(state.corpus().dendrogram.cut(k)?)
}

async fn dendrogram(State(state): State<AppState>) -> Response {
    Json(&state.corpus().dendrogram).into_response()
}

async fn session(State(state): State<AppState>) -> Json<ReviewSession> {
    Json((*state.session()).clone())
}

async fn clusters(State(state): State<AppState>, query: Result<Query<KQuery>, QueryRejection>) -> ApiResult<ClustersResponse> {
    let Query(q) = query?;
    let session = state.session();
    let k = q.k.unwrap_or(session.k);
    let cut = current_cut(&state, k)?;
    let corpus = state.corpus();
    let summaries = summarize(&cut, &corpus.matrix, &corpus.vocab, TOP_TERMS, SAMPLE_DOCS)?;
    let clusters = summaries
        .into_iter()
        .map(|s| {
            let id = cut.nodes[s.cluster];
            ClusterView {
                id,
                size: s.size,
                top_terms: s.top_terms,
                sample_doc_ids: s.sample_doc_ids,
                label: session.label_map.get(&id).cloned(),
            }
        })
        .collect();
    Ok(Json(ClustersResponse { k, clusters }))
}

async fn cluster_docs(
    State(state): State<AppState>,
    Path(id): Path<usize>,
    query: Result<Query<PageQuery>, QueryRejection>,
) -> ApiResult<DocsPage> {
    let Query(q) = query?;
    let page = q.page.unwrap_or(0);
    let page_size = q.page_size.unwrap_or(DEFAULT_PAGE_SIZE);
    if page_size == 0 || page_size > MAX_PAGE_SIZE {
        return Err(ApiError::bad_request(format!("page_size must be in 1..={MAX_PAGE_SIZE}")));
    }
    let cut = current_cut(&state, state.session().k)?;
    let index = cut
        .index_of_node(id)
        .ok_or_else(|| ApiError::not_found(format!("no cluster {id} at k = {}", cut.k)))?;
    let members = cut.members(index);
    let docs = members
        .iter()
        .skip(page.saturating_mul(page_size))
        .take(page_size)
        .map(|&i| {
            let d = &state.corpus().docs[i];
            let truncated = d.text.chars().count() > EXCERPT_CHARS;
            DocExcerpt {
                id: d.id.clone(),
                text: d.text.chars().take(EXCERPT_CHARS).collect(),
                truncated,
            }
        })
        .collect();
    Ok(Json(DocsPage { cluster: id, page, page_size, total: members.len(), docs }))
}

async fn set_label(State(state): State<AppState>, body: Result<Json<LabelBody>, JsonRejection>) -> ApiResult<ReviewSession> {
    let Json(body) = body?;
    let label = match body.label.map(|l| l.trim().to_owned()) {
        Some(l) if l.is_empty() => return Err(ApiError::bad_request("label must not be empty")),
        other => other,
    };
    let (_, session) = state
        .mutate(|s, corpus| {
            let cut = corpus.dendrogram.cut(s.k)?;
            if cut.index_of_node(body.cluster).is_none() {
                return Err(ApiError::not_found(format!("no cluster {} at k = {}", body.cluster, s.k)));
            }
            match label {
                Some(label) => {
                    s.label_map.insert(body.cluster, label.clone());
                    s.record(Action::Label { cluster: body.cluster, label });
                }
                None => {
                    s.label_map.remove(&body.cluster);
                    s.record(Action::Unlabel { cluster: body.cluster });
                }
            }
            Ok(())
        })
        .await?;
    Ok(Json((*session).clone()))
}

async fn set_cut(State(state): State<AppState>, body: Result<Json<CutBody>, JsonRejection>) -> ApiResult<ReviewSession> {
    let Json(body) = body?;
    let (_, session) = state
        .mutate(|s, corpus| {
            let dropped = s.apply_cut(&corpus.dendrogram, body.k)?;
            s.record(Action::Cut { k: body.k, dropped });
            Ok(())
        })
        .await?;
    Ok(Json((*session).clone()))
}

async fn export(State(state): State<AppState>) -> ApiResult<ExportResponse> {
    let session_path = state.inner.session_path.clone();
    let (resp, _) = state
        .mutate(|s, corpus| {
            let cut = corpus.dendrogram.cut(s.k)?;
            let unlabeled: Vec<usize> = cut.nodes.iter().copied().filter(|n| !s.label_map.contains_key(n)).collect();
            if !unlabeled.is_empty() {
                let mut e = ApiError::new(
                    StatusCode::CONFLICT,
                    "unlabeled_clusters",
                    format!("{} clusters have no label", unlabeled.len()),
                );
                e.unlabeled = Some(unlabeled);
                return Err(e);
            }
            let by_index: BTreeMap<usize, String> = cut
                .nodes
                .iter()
                .enumerate()
                .map(|(i, n)| (i, s.label_map[n].clone()))
                .collect();
            let (docs, manifest) = apply_labels(&cut, &corpus.docs, &by_index)?;
            let path = ReviewSession::resolve(&session_path, &s.export);
            save_dataset(&docs, &manifest, &path)?;
            s.record(Action::Export { path: s.export.clone(), total: manifest.total });
            Ok(ExportResponse {
                path: path.display().to_string(),
                percentages: manifest.percentages().into_iter().collect(),
                manifest,
            })
        })
        .await?;
    Ok(Json(resp))
}
