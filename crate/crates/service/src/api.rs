//! HTTP routes. Field names are listed in `docs/api.md`.

use std::collections::VecDeque;
use std::convert::Infallible;
use std::sync::Arc;

use axum::extract::{Path, Query, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::sse::{Event, KeepAlive, Sse};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use futures::stream::{self, Stream};
use serde::Deserialize;
use serde_json::{json, Value};

use star_core::graph::{export, graph_to_star, star_to_graph, ExportFormat, KnowledgeGraph};
use star_core::nl2star::{self, corenlp, AnnotatedStory};
use star_core::parser::{format_domain, parse_domain, parse_knowledge_only, Diagnostic};

use crate::auth;
use crate::jobs::{Queue, StreamEvent};
use crate::run::RunOptions;
use crate::store::{JobState, NewStory, Scope, Store, StoreError};

/// Called for every stored feedback message.
pub trait FeedbackNotifier: Send + Sync {
    fn notify(&self, id: &str, message: &str, contact: Option<&str>);
}

pub struct LogNotifier;

impl FeedbackNotifier for LogNotifier {
    fn notify(&self, id: &str, message: &str, contact: Option<&str>) {
        log::info!("feedback {id} from {}: {} bytes", contact.unwrap_or("anonymous"), message.len());
    }
}

pub struct AppState {
    pub queue: Arc<Queue>,
    pub annotator_url: Option<String>,
    pub notifier: Box<dyn FeedbackNotifier>,
}

impl AppState {
    fn store(&self) -> &Store {
        &self.queue.store
    }
}

pub type Shared = Arc<AppState>;

pub fn router(state: Shared) -> Router {
    Router::new()
        .route("/health", get(|| async { "ok" }))
        .route("/api/story/queue", post(queue_story))
        .route("/api/story/results/{id}", get(story_results))
        .route("/api/story/progress/{id}", get(story_progress))
        .route("/api/story/check", post(check_domain))
        .route("/api/stories", get(list_stories).post(save_story))
        .route("/api/stories/{id}", get(load_story))
        .route("/api/stories/{id}/share", post(share_story))
        .route("/api/stories/{id}/comments", get(list_comments).post(add_comment))
        .route("/api/feedback", post(submit_feedback))
        .route("/api/accounts", post(create_account))
        .route("/api/auth/{provider}", get(delegated_login))
        .route("/api/convert/nl2star", post(convert_nl2star))
        .route("/api/convert/graph2star", post(convert_graph2star))
        .route("/api/convert/star2graph", post(convert_star2graph))
        .with_state(state)
}

pub struct ApiError {
    status: StatusCode,
    body: Value,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> ApiError {
        ApiError { status, body: json!({ "error": code, "message": message.into() }) }
    }

    fn with(mut self, key: &str, value: Value) -> ApiError {
        self.body[key] = value;
        self
    }

    fn unauthorized() -> ApiError {
        ApiError::new(StatusCode::UNAUTHORIZED, "unauthorized", "sign in with a local account")
    }
}

impl From<StoreError> for ApiError {
    fn from(e: StoreError) -> ApiError {
        let (status, code) = match &e {
            StoreError::NotFound => (StatusCode::NOT_FOUND, "not_found"),
            StoreError::Forbidden => (StatusCode::FORBIDDEN, "forbidden"),
            StoreError::QueueFull(_) => (StatusCode::SERVICE_UNAVAILABLE, "queue_full"),
            StoreError::NotPublic => (StatusCode::FORBIDDEN, "not_public"),
            StoreError::Invalid(_) => (StatusCode::BAD_REQUEST, "invalid"),
            StoreError::Taken(_) => (StatusCode::CONFLICT, "taken"),
            StoreError::InvalidTransition { .. } | StoreError::Sql(_) => {
                log::error!("{e}");
                (StatusCode::INTERNAL_SERVER_ERROR, "internal")
            }
        };
        ApiError::new(status, code, e.to_string())
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut r = (self.status, Json(self.body)).into_response();
        if self.status == StatusCode::UNAUTHORIZED {
            r.headers_mut().insert(header::WWW_AUTHENTICATE, "Basic realm=\"star\"".parse().expect("static header"));
        }
        r
    }
}

type ApiResult<T> = Result<T, ApiError>;

/// The signed-in user, if any. Wrong credentials are an error even where
/// signing in is optional.
fn caller(state: &AppState, headers: &HeaderMap) -> ApiResult<Option<String>> {
    let Some(value) = headers.get(header::AUTHORIZATION) else {
        return Ok(None);
    };
    let (user, pass) = value.to_str().ok().and_then(auth::parse_basic).ok_or_else(ApiError::unauthorized)?;
    match state.store().credentials(&user)? {
        Some(creds) if auth::verify_password(&pass, &creds) => Ok(Some(user)),
        _ => Err(ApiError::unauthorized()),
    }
}

fn signed_in(state: &AppState, headers: &HeaderMap) -> ApiResult<String> {
    caller(state, headers)?.ok_or_else(ApiError::unauthorized)
}

fn error_diagnostics(diags: &[Diagnostic]) -> Value {
    serde_json::to_value(diags).expect("diagnostics serialize")
}

#[derive(Deserialize)]
struct QueueRequest {
    #[serde(default)]
    domain: Option<String>,
    #[serde(default)]
    story: Option<String>,
    #[serde(default)]
    knowledge: Option<String>,
    #[serde(default)]
    options: RunOptions,
}

impl QueueRequest {
    fn text(&self) -> String {
        match &self.domain {
            Some(d) => d.clone(),
            None => {
                let story = self.story.as_deref().unwrap_or("");
                let knowledge = self.knowledge.as_deref().unwrap_or("");
                format!("{story}\n{knowledge}")
            }
        }
    }
}

async fn queue_story(State(state): State<Shared>, Json(req): Json<QueueRequest>) -> ApiResult<impl IntoResponse> {
    let text = req.text();
    let parsed = parse_domain(&text);
    if parsed.domain.is_none() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "parse", "the domain does not parse")
            .with("diagnostics", error_diagnostics(&parsed.diagnostics)));
    }
    let id = state.queue.submit(&text, &req.options)?;
    Ok((StatusCode::ACCEPTED, Json(json!({ "id": id }))))
}

async fn story_results(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let job = state.store().job(&id)?.ok_or(StoreError::NotFound)?;
    let mut body = json!({
        "id": job.id,
        "state": job.state,
        "submittedAt": job.submitted_at,
        "startedAt": job.started_at,
        "finishedAt": job.finished_at,
    });
    match job.state {
        JobState::Queued | JobState::Running => body["status"] = json!("pending"),
        JobState::Done => {
            let out: Value = serde_json::from_str(job.result.as_deref().unwrap_or("null"))
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?;
            body["status"] = json!("done");
            body["raw"] = out["raw"].clone();
            body["reports"] = out["reports"].clone();
        }
        JobState::Failed => {
            body["status"] = json!("failed");
            body["error"] = json!(job.error);
        }
    }
    Ok(Json(body))
}

fn sse_event(e: &StreamEvent) -> Event {
    Event::default().event(e.name).data(e.data.to_string())
}

async fn story_progress(
    State(state): State<Shared>,
    Path(id): Path<String>,
) -> ApiResult<Sse<impl Stream<Item = Result<Event, Infallible>>>> {
    let sub = state.queue.hub.subscribe(state.store(), &id)?;
    let backlog: VecDeque<StreamEvent> = sub.backlog.into();
    let stream = stream::unfold((backlog, sub.live, false), |(mut backlog, mut live, finished)| async move {
        if finished {
            return None;
        }
        let next = match backlog.pop_front() {
            Some(e) => e,
            None => loop {
                let rx = live.as_mut()?;
                match rx.recv().await {
                    Ok(e) => break e,
                    Err(tokio::sync::broadcast::error::RecvError::Lagged(_)) => continue,
                    Err(tokio::sync::broadcast::error::RecvError::Closed) => return None,
                }
            },
        };
        let done = next.is_terminal();
        Some((Ok(sse_event(&next)), (backlog, live, done)))
    });
    Ok(Sse::new(stream).keep_alive(KeepAlive::default()))
}

#[derive(Deserialize)]
struct CheckRequest {
    domain: String,
}

async fn check_domain(Json(req): Json<CheckRequest>) -> Json<Value> {
    let parsed = parse_domain(&req.domain);
    Json(json!({
        "ok": parsed.domain.is_some(),
        "diagnostics": error_diagnostics(&parsed.diagnostics),
        "formatted": parsed.domain.as_ref().map(format_domain),
    }))
}

#[derive(Deserialize)]
struct ListQuery {
    #[serde(default)]
    scope: Option<Scope>,
}

async fn list_stories(
    State(state): State<Shared>,
    headers: HeaderMap,
    Query(q): Query<ListQuery>,
) -> ApiResult<Json<Value>> {
    let user = caller(&state, &headers)?;
    let scope = q.scope.unwrap_or(Scope::Public);
    if scope == Scope::Mine && user.is_none() {
        return Err(ApiError::unauthorized());
    }
    let stories = state.store().list_stories(scope, user.as_deref())?;
    Ok(Json(json!({ "scope": scope, "stories": stories })))
}

async fn save_story(
    State(state): State<Shared>,
    headers: HeaderMap,
    Json(req): Json<NewStory>,
) -> ApiResult<impl IntoResponse> {
    let user = signed_in(&state, &headers)?;
    let created = req.id.is_none();
    let rec = state.store().save_story(&user, &req)?;
    Ok((if created { StatusCode::CREATED } else { StatusCode::OK }, Json(rec)))
}

async fn load_story(State(state): State<Shared>, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let user = caller(&state, &headers)?;
    let rec = state.store().load_story(&id, user.as_deref())?;
    Ok(Json(serde_json::to_value(rec).expect("record serializes")))
}

async fn share_story(State(state): State<Shared>, headers: HeaderMap, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let user = signed_in(&state, &headers)?;
    let rec = state.store().share_story(&id, &user)?;
    Ok(Json(serde_json::to_value(rec).expect("record serializes")))
}

async fn list_comments(State(state): State<Shared>, Path(id): Path<String>) -> ApiResult<Json<Value>> {
    let comments = state.store().comments(&id)?;
    Ok(Json(json!({ "comments": comments })))
}

#[derive(Deserialize)]
struct CommentRequest {
    body: String,
}

async fn add_comment(
    State(state): State<Shared>,
    headers: HeaderMap,
    Path(id): Path<String>,
    Json(req): Json<CommentRequest>,
) -> ApiResult<impl IntoResponse> {
    let user = signed_in(&state, &headers)?;
    let c = state.store().add_comment(&id, &user, &req.body)?;
    Ok((StatusCode::CREATED, Json(c)))
}

#[derive(Deserialize)]
struct FeedbackRequest {
    message: String,
    #[serde(default)]
    contact: Option<String>,
}

async fn submit_feedback(State(state): State<Shared>, Json(req): Json<FeedbackRequest>) -> ApiResult<impl IntoResponse> {
    let id = state.store().add_feedback(&req.message, req.contact.as_deref())?;
    state.notifier.notify(&id, &req.message, req.contact.as_deref());
    Ok((StatusCode::CREATED, Json(json!({ "id": id }))))
}

#[derive(Deserialize)]
struct AccountRequest {
    username: String,
    password: String,
}

async fn create_account(State(state): State<Shared>, Json(req): Json<AccountRequest>) -> ApiResult<impl IntoResponse> {
    if !auth::valid_username(&req.username) {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid", "usernames are 3-32 letters, digits, `_` or `-`"));
    }
    if req.password.len() < 8 {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid", "passwords need at least 8 characters"));
    }
    state.store().create_account(&req.username, &auth::hash_password(&req.password))?;
    Ok((StatusCode::CREATED, Json(json!({ "username": req.username }))))
}

async fn delegated_login(Path(provider): Path<String>) -> ApiError {
    ApiError::new(StatusCode::NOT_IMPLEMENTED, "not_implemented", format!("sign-in through `{provider}` is not available"))
}

#[derive(Deserialize)]
struct Nl2StarRequest {
    #[serde(default)]
    annotations: Option<AnnotatedStory>,
    #[serde(default)]
    text: Option<String>,
}

async fn convert_nl2star(State(state): State<Shared>, Json(req): Json<Nl2StarRequest>) -> ApiResult<Json<Value>> {
    let story = match (req.annotations, req.text) {
        (Some(a), _) => a,
        (None, Some(text)) => {
            let url = state.annotator_url.clone().ok_or_else(|| {
                ApiError::new(StatusCode::SERVICE_UNAVAILABLE, "no_annotator", "no annotation service is configured")
            })?;
            tokio::task::spawn_blocking(move || corenlp::fetch_annotations(&text, &url))
                .await
                .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "internal", e.to_string()))?
                .map_err(|e| {
                    let status = if matches!(e, corenlp::AnnotationError::EmptyText) {
                        StatusCode::BAD_REQUEST
                    } else {
                        StatusCode::BAD_GATEWAY
                    };
                    ApiError::new(status, "annotation", e.to_string()).with("retryable", json!(e.is_retryable()))
                })?
        }
        (None, None) => return Err(ApiError::new(StatusCode::BAD_REQUEST, "invalid", "send `annotations` or `text`")),
    };
    let (domain, trace) = nl2star::convert(&story)
        .map_err(|e| ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "conversion", e.to_string()))?;
    Ok(Json(json!({ "star": format_domain(&domain), "trace": trace })))
}

async fn convert_graph2star(Json(graph): Json<KnowledgeGraph>) -> ApiResult<Json<Value>> {
    match graph_to_star(&graph) {
        Ok(star) => Ok(Json(json!({ "star": star }))),
        Err(diags) => Err(ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_graph", "the graph is not valid STAR")
            .with("diagnostics", serde_json::to_value(diags).expect("diagnostics serialize"))),
    }
}

#[derive(Deserialize)]
struct Star2GraphRequest {
    knowledge: String,
    #[serde(default)]
    format: Option<String>,
}

async fn convert_star2graph(Json(req): Json<Star2GraphRequest>) -> ApiResult<Response> {
    let format: ExportFormat = req
        .format
        .as_deref()
        .unwrap_or("json")
        .parse()
        .map_err(|e: star_core::graph::GraphError| ApiError::new(StatusCode::BAD_REQUEST, "format", e.to_string()))?;
    let parsed = parse_knowledge_only(&req.knowledge);
    let Some(domain) = parsed.domain else {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "parse", "the rules do not parse")
            .with("diagnostics", error_diagnostics(&parsed.diagnostics)));
    };
    let bytes = export(&star_to_graph(&domain), format);
    let mime = match format {
        ExportFormat::GraphMl => "application/graphml+xml",
        ExportFormat::Json | ExportFormat::ImageManifest => "application/json",
    };
    Ok(([(header::CONTENT_TYPE, mime)], bytes).into_response())
}
