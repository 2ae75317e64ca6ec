//! HTTP + JSON routes over a [`SessionStore`].

use std::sync::Arc;

use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use deriver_core::textio::WireEdit;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::session::{ServiceError, SessionStore, Source};

impl IntoResponse for ServiceError {
    fn into_response(self) -> Response {
        let status = match &self {
            ServiceError::UnknownSession(_) => StatusCode::NOT_FOUND,
            ServiceError::NothingToUndo | ServiceError::NothingToRedo => StatusCode::CONFLICT,
            ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
            _ => StatusCode::UNPROCESSABLE_ENTITY,
        };
        let mut body = json!({"error": self.code(), "message": self.to_string()});
        if let Some(span) = self.span() {
            body["span"] = json!({
                "line": span.start.line,
                "column": span.start.col,
                "end_line": span.end.line,
                "end_column": span.end.col,
            });
        }
        (status, Json(body)).into_response()
    }
}

impl From<JsonRejection> for ServiceError {
    fn from(e: JsonRejection) -> Self {
        ServiceError::BadRequest(e.body_text())
    }
}

type Shared = Arc<SessionStore>;
type ApiResult = Result<Json<Value>, ServiceError>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CreateBody {
    system: Option<String>,
    text: Option<String>,
}

#[derive(Deserialize)]
struct RulesQuery {
    #[serde(default)]
    query: String,
    category: Option<String>,
}

#[derive(Deserialize)]
struct DocQuery {
    node: Option<String>,
    rule: Option<String>,
}

fn to_json(v: impl serde::Serialize) -> Json<Value> {
    Json(serde_json::to_value(v).expect("payloads serialize"))
}

async fn create(State(store): State<Shared>, body: Result<Json<CreateBody>, JsonRejection>) -> Result<Response, ServiceError> {
    let Json(body) = body?;
    let source = match (&body.system, &body.text) {
        (Some(s), None) => Source::System(s),
        (None, Some(t)) => Source::Text(t),
        _ => return Err(ServiceError::BadRequest("give exactly one of `system` and `text`".into())),
    };
    let (_, state) = store.create(source)?;
    Ok((StatusCode::CREATED, to_json(state)).into_response())
}

async fn edit(State(store): State<Shared>, Path(id): Path<String>, body: Result<Json<WireEdit>, JsonRejection>) -> ApiResult {
    let Json(edit) = body?;
    Ok(to_json(store.post_edit(&id, &edit)?))
}

async fn undo(State(store): State<Shared>, Path(id): Path<String>) -> ApiResult {
    Ok(to_json(store.undo(&id)?))
}

async fn redo(State(store): State<Shared>, Path(id): Path<String>) -> ApiResult {
    Ok(to_json(store.redo(&id)?))
}

async fn rules(State(store): State<Shared>, Path(id): Path<String>, Query(q): Query<RulesQuery>) -> ApiResult {
    Ok(to_json(store.rules(&id, &q.query, q.category.as_deref())?))
}

async fn doc_for(State(store): State<Shared>, Path(id): Path<String>, Query(q): Query<DocQuery>) -> ApiResult {
    Ok(to_json(store.doc_for(&id, q.node.as_deref(), q.rule.as_deref())?))
}

async fn state(State(store): State<Shared>, Path(id): Path<String>) -> ApiResult {
    Ok(to_json(store.state(&id)?))
}

async fn export(State(store): State<Shared>, Path(id): Path<String>) -> Result<Response, ServiceError> {
    let text = store.export(&id)?;
    Ok(([(axum::http::header::CONTENT_TYPE, "text/plain; charset=utf-8")], text).into_response())
}

async fn remove(State(store): State<Shared>, Path(id): Path<String>) -> Result<StatusCode, ServiceError> {
    store.drop_session(&id)?;
    Ok(StatusCode::NO_CONTENT)
}

pub fn router(store: Shared) -> Router {
    Router::new()
        .route("/sessions", post(create))
        .route("/sessions/{id}", axum::routing::delete(remove))
        .route("/sessions/{id}/edits", post(edit))
        .route("/sessions/{id}/undo", post(undo))
        .route("/sessions/{id}/redo", post(redo))
        .route("/sessions/{id}/rules", get(rules))
        .route("/sessions/{id}/doc", get(doc_for))
        .route("/sessions/{id}/state", get(state))
        .route("/sessions/{id}/export", get(export))
        .with_state(store)
}
