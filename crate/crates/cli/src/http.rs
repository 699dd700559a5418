//! JSON over HTTP for the session service.
//!
//! | method | path | body | response |
//! |---|---|---|---|
//! | POST | `/sessions` | `{"facilitator"}` | session summary (201) |
//! | GET | `/sessions` | | list of summaries |
//! | GET | `/sessions/{id}` | | session summary |
//! | POST | `/sessions/{id}/alternatives` | front export or `{"alternatives": [...]}` | session summary |
//! | POST | `/sessions/{id}/voters` | `{"voter_id", "weight"}` | `{"voter_id", "token"}` (201) |
//! | POST | `/sessions/{id}/open` | | session summary |
//! | POST | `/sessions/{id}/ballots` | `{"ranking": [...]}`, bearer token | voter view |
//! | GET | `/sessions/{id}/me` | bearer token | voter view |
//! | POST | `/sessions/{id}/close` | optional `{"allow_missing"}` | ranking document |
//! | GET | `/sessions/{id}/result` | | ranking document |
//! | GET | `/sessions/{id}/export` | | session export |
//! | POST | `/sessions/import` | session export | `{"session", "tokens"}` (201) |
//!
//! Errors come back as `{"error": CODE, "message": ...}` with a matching status.

use std::sync::Arc;

use axum::body::Bytes;
use axum::extract::{Path, State};
use axum::http::{header, HeaderMap, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use cropplan_core::group::RankingDocument;
use cropplan_core::pareto::FrontDocument;
use cropplan_core::service::{ServiceError, SessionAlternative, SessionExport, SessionStore};
use serde::{Deserialize, Serialize};
use serde_json::json;

pub type SharedStore = Arc<SessionStore>;

pub struct ApiError(ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

fn status_of(e: &ServiceError) -> StatusCode {
    match e {
        ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
        ServiceError::BadToken => StatusCode::UNAUTHORIZED,
        ServiceError::WrongState { .. } | ServiceError::Duplicate(_) | ServiceError::MissingBallots(_) => {
            StatusCode::CONFLICT
        }
        ServiceError::Io { .. } | ServiceError::CorruptLog { .. } => StatusCode::INTERNAL_SERVER_ERROR,
        _ => StatusCode::UNPROCESSABLE_ENTITY,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let mut body = json!({ "error": self.0.code(), "message": self.0.to_string() });
        match &self.0 {
            ServiceError::InvalidBallot(issues) => body["issues"] = json!(issues),
            ServiceError::MissingBallots(voters) => body["voters"] = json!(voters),
            _ => {}
        }
        (status_of(&self.0), Json(body)).into_response()
    }
}

fn bad_request(message: String) -> Response {
    (StatusCode::BAD_REQUEST, Json(json!({ "error": "BAD_REQUEST", "message": message }))).into_response()
}

/// Parses a JSON body, answering 400 with the serde message when it does not fit.
fn parse<T: serde::de::DeserializeOwned>(body: &Bytes) -> Result<T, Response> {
    serde_json::from_slice(body).map_err(|e| bad_request(format!("malformed body: {e}")))
}

fn bearer(headers: &HeaderMap) -> Result<&str, ApiError> {
    headers
        .get(header::AUTHORIZATION)
        .and_then(|v| v.to_str().ok())
        .and_then(|v| v.strip_prefix("Bearer "))
        .map(str::trim)
        .ok_or(ApiError(ServiceError::BadToken))
}

type Reply = Result<Response, Response>;

fn ok<T: Serialize>(status: StatusCode, value: Result<T, ServiceError>) -> Reply {
    match value {
        Ok(v) => Ok((status, Json(v)).into_response()),
        Err(e) => Err(ApiError(e).into_response()),
    }
}

#[derive(Deserialize)]
struct CreateSession {
    #[serde(default)]
    facilitator: String,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum AlternativesBody {
    Front(FrontDocument),
    List { alternatives: Vec<SessionAlternative> },
}

#[derive(Deserialize)]
struct RegisterVoter {
    voter_id: String,
    weight: f64,
}

#[derive(Serialize)]
struct Registered {
    voter_id: String,
    token: String,
}

#[derive(Deserialize)]
struct SubmitBallot {
    ranking: Vec<String>,
}

#[derive(Deserialize, Default)]
struct Close {
    #[serde(default)]
    allow_missing: bool,
}

async fn create(State(store): State<SharedStore>, body: Bytes) -> Reply {
    let req: CreateSession = if body.is_empty() { CreateSession { facilitator: String::new() } } else { parse(&body)? };
    ok(StatusCode::CREATED, store.create_session(&req.facilitator))
}

async fn list(State(store): State<SharedStore>) -> Json<serde_json::Value> {
    Json(json!(store.list_sessions()))
}

async fn summary(State(store): State<SharedStore>, Path(id): Path<String>) -> Reply {
    ok(StatusCode::OK, store.summary(&id))
}

async fn alternatives(State(store): State<SharedStore>, Path(id): Path<String>, body: Bytes) -> Reply {
    let alternatives = match parse::<AlternativesBody>(&body)? {
        AlternativesBody::Front(front) => SessionAlternative::from_front(&front),
        AlternativesBody::List { alternatives } => alternatives,
    };
    ok(StatusCode::OK, store.add_alternatives(&id, alternatives))
}

async fn voters(State(store): State<SharedStore>, Path(id): Path<String>, body: Bytes) -> Reply {
    let req: RegisterVoter = parse(&body)?;
    let token = store.register_voter(&id, &req.voter_id, req.weight);
    ok(StatusCode::CREATED, token.map(|token| Registered { voter_id: req.voter_id, token }))
}

async fn open(State(store): State<SharedStore>, Path(id): Path<String>) -> Reply {
    ok(StatusCode::OK, store.open_voting(&id))
}

async fn ballots(State(store): State<SharedStore>, Path(id): Path<String>, headers: HeaderMap, body: Bytes) -> Reply {
    let token = bearer(&headers).map_err(IntoResponse::into_response)?;
    let req: SubmitBallot = parse(&body)?;
    ok(StatusCode::OK, store.submit_ballot(&id, token, req.ranking))
}

async fn me(State(store): State<SharedStore>, Path(id): Path<String>, headers: HeaderMap) -> Reply {
    let token = bearer(&headers).map_err(IntoResponse::into_response)?;
    ok(StatusCode::OK, store.voter_view(&id, token))
}

async fn close(State(store): State<SharedStore>, Path(id): Path<String>, body: Bytes) -> Reply {
    let req: Close = if body.is_empty() { Close::default() } else { parse(&body)? };
    ok(StatusCode::OK, store.close_and_rank(&id, req.allow_missing).map(RankingDocument::from))
}

async fn result(State(store): State<SharedStore>, Path(id): Path<String>) -> Reply {
    ok(StatusCode::OK, store.result(&id).map(RankingDocument::from))
}

async fn export(State(store): State<SharedStore>, Path(id): Path<String>) -> Reply {
    match store.export_json(&id) {
        Ok(text) => Ok(([(header::CONTENT_TYPE, "application/json")], text).into_response()),
        Err(e) => Err(ApiError(e).into_response()),
    }
}

async fn import(State(store): State<SharedStore>, body: Bytes) -> Reply {
    let snapshot: SessionExport = parse(&body)?;
    ok(StatusCode::CREATED, store.import(snapshot))
}

pub fn router(store: SharedStore) -> Router {
    Router::new()
        .route("/sessions", post(create).get(list))
        .route("/sessions/import", post(import))
        .route("/sessions/{id}", get(summary))
        .route("/sessions/{id}/alternatives", post(alternatives))
        .route("/sessions/{id}/voters", post(voters))
        .route("/sessions/{id}/open", post(open))
        .route("/sessions/{id}/ballots", post(ballots))
        .route("/sessions/{id}/me", get(me))
        .route("/sessions/{id}/close", post(close))
        .route("/sessions/{id}/result", get(result))
        .route("/sessions/{id}/export", get(export))
        .with_state(store)
}
