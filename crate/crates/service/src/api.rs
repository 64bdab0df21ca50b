use std::convert::Infallible;
use std::sync::Arc;

use axum::body::{Body, Bytes};
use axum::extract::{Path, Query, State};
use axum::http::{header, StatusCode};
use axum::response::{IntoResponse, Response};
use axum::Json;
use dcr_core::dsl::{parse_graph, ParseError};
use dcr_core::engine::{Blocker, ExecError, TimeError};
use dcr_core::json::{graph_from_json, JsonError};
use dcr_core::patterns::{catalog, find, ParamValue};
use dcr_core::{advance_time, execute, parse_duration, validate, Duration, EventId, Graph, Value};
use futures::stream::{self, StreamExt};
use serde::Deserialize;
use serde_json::{json, Value as Json_};

use crate::session::{HistoryEntry, Session};
use crate::AppState;

pub struct ApiError {
    status: StatusCode,
    body: Json_,
}

impl ApiError {
    fn new(status: StatusCode, error: &str, message: impl ToString) -> Self {
        ApiError {
            status,
            body: json!({ "error": error, "message": message.to_string() }),
        }
    }

    fn with(mut self, key: &str, value: Json_) -> Self {
        self.body[key] = value;
        self
    }

    fn bad_request(message: impl ToString) -> Self {
        Self::new(StatusCode::BAD_REQUEST, "MalformedBody", message)
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

impl From<ParseError> for ApiError {
    fn from(e: ParseError) -> Self {
        ApiError::new(StatusCode::BAD_REQUEST, "ParseError", &e)
            .with("line", json!(e.span.line))
            .with("column", json!(e.span.column))
            .with("expected", json!(e.expected))
    }
}

impl From<JsonError> for ApiError {
    fn from(e: JsonError) -> Self {
        let kind = match e {
            JsonError::MalformedJson(_) => "MalformedJson",
            JsonError::SchemaViolation(_) => "SchemaViolation",
        };
        ApiError::new(StatusCode::BAD_REQUEST, kind, e)
    }
}

fn blocker_json(b: &Blocker) -> Json_ {
    match b {
        Blocker::Role { event, role } => json!({ "clause": "role", "event": event, "role": role }),
        Blocker::Excluded { event } => json!({ "clause": "included", "event": event }),
        Blocker::Condition { source, delay, age } => {
            json!({ "clause": "condition", "source": source, "delay": delay.steps(), "age": age })
        }
        Blocker::Milestone { source } => json!({ "clause": "milestone", "source": source }),
        Blocker::Parent { parent, cause } => {
            json!({ "clause": "parent", "parent": parent, "cause": blocker_json(cause) })
        }
    }
}

impl From<ExecError> for ApiError {
    fn from(e: ExecError) -> Self {
        let conflict = |kind| ApiError::new(StatusCode::CONFLICT, kind, &e);
        match &e {
            ExecError::NotEnabled { event, blocker } => conflict("NotEnabled")
                .with("clause", json!(blocker.clause()))
                .with("event", json!(event))
                .with("blocker", blocker_json(blocker)),
            ExecError::UnknownEvent(id) => conflict("UnknownEvent").with("event", json!(id)),
            ExecError::MissingInput(id) => conflict("MissingInput").with("event", json!(id)),
            ExecError::UnexpectedInput(id) => conflict("UnexpectedInput").with("event", json!(id)),
            ExecError::Evaluation { event, .. } => conflict("EvaluationError").with("event", json!(event)),
        }
    }
}

impl From<TimeError> for ApiError {
    fn from(e: TimeError) -> Self {
        match &e {
            TimeError::DeadlineViolation(list) => {
                let offending: Vec<Json_> =
                    list.iter().map(|(id, d)| json!({ "event": id, "deadline": d })).collect();
                ApiError::new(StatusCode::CONFLICT, "DeadlineViolation", &e).with("violations", json!(offending))
            }
            TimeError::Overflow(id) => ApiError::new(StatusCode::CONFLICT, "TimeOverflow", &e).with("event", json!(id)),
        }
    }
}

type ApiResult<T = Response> = Result<T, ApiError>;

fn session(state: &AppState, id: &str) -> ApiResult<Arc<Session>> {
    state
        .store
        .get(id)
        .ok_or_else(|| ApiError::new(StatusCode::NOT_FOUND, "UnknownSession", format!("no session {id:?}")))
}

fn parse_body<T: for<'de> Deserialize<'de>>(body: &[u8]) -> ApiResult<T> {
    serde_json::from_slice(body).map_err(ApiError::bad_request)
}

fn load_graph(body: &[u8]) -> ApiResult<Graph> {
    let text = std::str::from_utf8(body).map_err(|_| ApiError::bad_request("body is not UTF-8"))?;
    let graph = if text.trim_start().starts_with('{') {
        graph_from_json(text)?
    } else {
        parse_graph(text)?
    };
    let report = validate(&graph);
    if !report.is_valid() {
        return Err(ApiError::new(StatusCode::BAD_REQUEST, "InvalidGraph", "graph failed validation")
            .with("report", json!(report)));
    }
    Ok(graph)
}

pub async fn create_graph(State(state): State<AppState>, body: Bytes) -> ApiResult {
    let graph = load_graph(&body)?;
    let session = state.store.create(graph);
    let live = session.lock();
    let body = json!({ "sessionId": session.id, "state": session.state(&live) });
    Ok((StatusCode::CREATED, Json(body)).into_response())
}

pub async fn get_session(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Json_>> {
    let session = session(&state, &id)?;
    let live = session.lock();
    Ok(Json(session.state(&live)))
}

#[derive(Deserialize)]
pub struct RoleQuery {
    role: Option<String>,
}

pub async fn get_enabled(
    State(state): State<AppState>,
    Path(id): Path<String>,
    Query(q): Query<RoleQuery>,
) -> ApiResult<Json<Vec<String>>> {
    let session = session(&state, &id)?;
    let role = q.role.ok_or_else(|| ApiError::bad_request("missing `role` query parameter"))?;
    let live = session.lock();
    Ok(Json(session.enabled(&live, &role)))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExecuteBody {
    event: String,
    role: String,
    #[serde(default)]
    value: Option<Json_>,
}

pub async fn post_execute(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Json_>> {
    let session = session(&state, &id)?;
    let req: ExecuteBody = parse_body(&body)?;
    let input = match &req.value {
        None | Some(Json_::Null) => None,
        Some(v) => Some(
            Value::from_json(v).ok_or_else(|| ApiError::bad_request("value must be an integer, boolean or string"))?,
        ),
    };
    let event = EventId::new(&req.event).map_err(|_| {
        ApiError::new(StatusCode::CONFLICT, "UnknownEvent", format!("unknown event `{}`", req.event))
            .with("event", json!(req.event))
    })?;

    let mut live = session.lock();
    let (marking, report) = execute(&session.graph, &live.marking, &event, &req.role, input.clone())?;
    live.marking = marking;
    let at = live.now;
    live.history.push(HistoryEntry::Execute {
        at,
        role: req.role,
        event: req.event,
        input,
        report: Box::new(report.clone()),
    });
    session.publish("execute", &live);
    Ok(Json(json!({ "report": report, "state": session.state(&live) })))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DurationField {
    Steps(u64),
    Iso(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AdvanceBody {
    duration: DurationField,
}

pub async fn post_advance(State(state): State<AppState>, Path(id): Path<String>, body: Bytes) -> ApiResult<Json<Json_>> {
    let session = session(&state, &id)?;
    let req: AdvanceBody = parse_body(&body)?;
    let delta = match req.duration {
        DurationField::Steps(n) => Duration::from_steps(n),
        DurationField::Iso(text) => parse_duration(&text).map_err(ApiError::bad_request)?,
    };
    let mut live = session.lock();
    let now = live
        .now
        .checked_add(delta.steps())
        .ok_or_else(|| ApiError::new(StatusCode::CONFLICT, "TimeOverflow", "session clock overflows"))?;
    live.marking = advance_time(&live.marking, delta)?;
    live.now = now;
    if delta.steps() > 0 {
        live.history.push(HistoryEntry::Advance { at: now, steps: delta.steps() });
        session.publish("advance", &live);
    }
    Ok(Json(session.state(&live)))
}

pub async fn post_reset(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Json_>> {
    let session = session(&state, &id)?;
    let mut live = session.lock();
    session.reset(&mut live);
    session.publish("reset", &live);
    Ok(Json(session.state(&live)))
}

pub async fn get_accepting(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult<Json<Json_>> {
    let session = session(&state, &id)?;
    let live = session.lock();
    Ok(Json(json!({ "accepting": dcr_core::is_accepting(&live.marking) })))
}

pub async fn get_dot(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = session(&state, &id)?;
    let live = session.lock();
    let dot = dcr_core::dot::export_dot(&session.graph, Some(&live.marking));
    Ok(([(header::CONTENT_TYPE, "text/vnd.graphviz; charset=utf-8")], dot).into_response())
}

pub async fn get_trace(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = session(&state, &id)?;
    let live = session.lock();
    Ok(([(header::CONTENT_TYPE, "application/x-ndjson")], session.trace(&live)).into_response())
}

pub async fn get_stream(State(state): State<AppState>, Path(id): Path<String>) -> ApiResult {
    let session = session(&state, &id)?;
    let (rx, snapshot) = {
        let live = session.lock();
        let rx = session.subscribe();
        (rx, json!({ "type": "snapshot", "state": session.state(&live) }).to_string())
    };
    drop(session);
    let first = stream::once(async move { Ok::<_, Infallible>(Bytes::from(snapshot + "\n")) });
    let changes = stream::unfold(rx, |mut rx| async move {
        use tokio::sync::broadcast::error::RecvError;
        loop {
            match rx.recv().await {
                Ok(msg) => return Some((Ok(Bytes::from(format!("{msg}\n"))), rx)),
                Err(RecvError::Lagged(_)) => continue,
                Err(RecvError::Closed) => return None,
            }
        }
    });
    Ok((
        [(header::CONTENT_TYPE, "application/x-ndjson"), (header::CACHE_CONTROL, "no-cache")],
        Body::from_stream(first.chain(changes)),
    )
        .into_response())
}

pub async fn list_patterns() -> Json<Json_> {
    let list: Vec<Json_> = catalog()
        .iter()
        .map(|d| {
            let params: serde_json::Map<String, Json_> = d
                .defaults()
                .into_iter()
                .map(|(k, v)| {
                    let v = match v {
                        ParamValue::Int(i) => json!(i),
                        ParamValue::Duration(d) => json!(d.to_string()),
                    };
                    (k.to_string(), v)
                })
                .collect();
            json!({ "name": d.name, "citation": d.citation, "params": params })
        })
        .collect();
    Json(json!(list))
}

pub async fn get_pattern(Path(name): Path<String>) -> ApiResult {
    let d = find(&name).map_err(|e| ApiError::new(StatusCode::NOT_FOUND, "UnknownPattern", e))?;
    Ok(([(header::CONTENT_TYPE, "text/plain; charset=utf-8")], d.source).into_response())
}
