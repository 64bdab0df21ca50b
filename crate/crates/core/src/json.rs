//! Canonical JSON form of graphs and markings.
//!
//! Objects are emitted with sorted keys and no insignificant whitespace, so
//! equal values always produce identical bytes. Expressions travel as DSL
//! text; deadlines use a step count or the string `"inf"`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::dsl::{parse_expr, RESERVED};
use crate::duration::{Deadline, Duration};
use crate::expr::Value;
use crate::model::{is_valid_ident, Event, EventId, EventKind, Graph, Label, Marking, Relation, RelationKind};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    MalformedJson(String),
    #[error("schema violation: {0}")]
    SchemaViolation(String),
}

impl From<serde_json::Error> for JsonError {
    fn from(err: serde_json::Error) -> Self {
        use serde_json::error::Category;
        match err.classify() {
            Category::Syntax | Category::Eof | Category::Io => JsonError::MalformedJson(err.to_string()),
            Category::Data => JsonError::SchemaViolation(err.to_string()),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    name: String,
    #[serde(default)]
    roles: Vec<String>,
    #[serde(default)]
    events: Vec<EventDoc>,
    #[serde(default)]
    relations: Vec<RelationDoc>,
    #[serde(default)]
    initial: Marking,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum KindTag {
    Input,
    Compute,
    Simple,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventDoc {
    id: EventId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    kind: KindTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    expr: Option<String>,
    #[serde(default)]
    roles: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    parent: Option<EventId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum RelationTag {
    Condition,
    Response,
    Milestone,
    Include,
    Exclude,
    Cancel,
    Value,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RelationDoc {
    kind: RelationTag,
    source: EventId,
    target: EventId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    guard: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delay: Option<Duration>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deadline: Option<Deadline>,
}

fn canonical<T: Serialize>(value: &T) -> String {
    // Routing through `serde_json::Value` sorts object keys.
    let tree = serde_json::to_value(value).expect("in-memory JSON encoding cannot fail");
    serde_json::to_string(&tree).expect("in-memory JSON encoding cannot fail")
}

pub fn graph_to_json(graph: &Graph) -> String {
    canonical(&graph_doc(graph))
}

pub fn marking_to_json(marking: &Marking) -> String {
    canonical(marking)
}

/// Graph as a JSON tree, for embedding in larger documents.
pub fn graph_to_value(graph: &Graph) -> serde_json::Value {
    serde_json::to_value(graph_doc(graph)).expect("in-memory JSON encoding cannot fail")
}

fn graph_doc(graph: &Graph) -> GraphDoc {
    GraphDoc {
        name: graph.name().to_string(),
        roles: graph.declared_roles().to_vec(),
        events: graph
            .events()
            .iter()
            .map(|e| EventDoc {
                id: e.id.clone(),
                label: (e.label.action != e.id.as_str()).then(|| e.label.action.clone()),
                kind: match e.kind {
                    EventKind::Input => KindTag::Input,
                    EventKind::Computation(_) => KindTag::Compute,
                    EventKind::Simple => KindTag::Simple,
                },
                expr: match &e.kind {
                    EventKind::Computation(expr) => Some(expr.to_string()),
                    _ => None,
                },
                roles: e.label.roles.clone(),
                parent: e.parent.clone(),
            })
            .collect(),
        relations: graph
            .relations()
            .iter()
            .map(|r| {
                let (tag, delay, deadline) = match r.kind {
                    RelationKind::Condition { delay } => (RelationTag::Condition, Some(delay), None),
                    RelationKind::Response { deadline } => (RelationTag::Response, None, Some(deadline)),
                    RelationKind::Milestone => (RelationTag::Milestone, None, None),
                    RelationKind::Include => (RelationTag::Include, None, None),
                    RelationKind::Exclude => (RelationTag::Exclude, None, None),
                    RelationKind::Cancel => (RelationTag::Cancel, None, None),
                    RelationKind::Value => (RelationTag::Value, None, None),
                };
                RelationDoc {
                    kind: tag,
                    source: r.source.clone(),
                    target: r.target.clone(),
                    guard: r.guard.as_ref().map(ToString::to_string),
                    delay,
                    deadline,
                }
            })
            .collect(),
        initial: graph.initial_marking().clone(),
    }
}

pub fn marking_from_json(text: &str) -> Result<Marking, JsonError> {
    let mut marking: Marking = serde_json::from_str(text)?;
    marking.values.retain(|_, v| v.is_defined());
    Ok(marking)
}

pub fn graph_from_json(text: &str) -> Result<Graph, JsonError> {
    let doc: GraphDoc = serde_json::from_str(text)?;
    graph_from_doc(doc)
}

/// Builds a graph from an already-parsed JSON tree.
pub fn graph_from_value(value: serde_json::Value) -> Result<Graph, JsonError> {
    let doc: GraphDoc = serde_json::from_value(value)?;
    graph_from_doc(doc)
}

fn schema(message: impl Into<String>) -> JsonError {
    JsonError::SchemaViolation(message.into())
}

fn check_id(id: &EventId) -> Result<(), JsonError> {
    if RESERVED.contains(&id.as_str()) {
        return Err(schema(format!("`{id}` is reserved and cannot name an event")));
    }
    Ok(())
}

fn graph_from_doc(doc: GraphDoc) -> Result<Graph, JsonError> {
    if !is_valid_ident(&doc.name) {
        return Err(schema(format!("graph name {:?} is not an identifier", doc.name)));
    }
    for role in doc.roles.iter().chain(doc.events.iter().flat_map(|e| &e.roles)) {
        if !is_valid_ident(role) {
            return Err(schema(format!("role name {role:?} is not an identifier")));
        }
    }

    let mut events = Vec::with_capacity(doc.events.len());
    for e in doc.events {
        check_id(&e.id)?;
        if let Some(parent) = &e.parent {
            check_id(parent)?;
        }
        let kind = match (e.kind, e.expr) {
            (KindTag::Compute, Some(text)) => EventKind::Computation(
                parse_expr(&text)
                    .map_err(|err| schema(format!("expression of `{}`: {}", e.id, err.message)))?,
            ),
            (KindTag::Compute, None) => {
                return Err(schema(format!("computation event `{}` lacks `expr`", e.id)))
            }
            (_, Some(_)) => return Err(schema(format!("event `{}` is not a computation but has `expr`", e.id))),
            (KindTag::Input, None) => EventKind::Input,
            (KindTag::Simple, None) => EventKind::Simple,
        };
        events.push(Event {
            label: Label {
                action: e.label.unwrap_or_else(|| e.id.to_string()),
                roles: e.roles,
            },
            id: e.id,
            kind,
            parent: e.parent,
        });
    }

    let mut relations = Vec::with_capacity(doc.relations.len());
    for r in doc.relations {
        check_id(&r.source)?;
        check_id(&r.target)?;
        let kind = match (r.kind, r.delay, r.deadline) {
            (RelationTag::Condition, delay, None) => RelationKind::Condition {
                delay: delay.unwrap_or(Duration::ZERO),
            },
            (RelationTag::Response, None, deadline) => RelationKind::Response {
                deadline: deadline.unwrap_or(Deadline::Infinity),
            },
            (RelationTag::Milestone, None, None) => RelationKind::Milestone,
            (RelationTag::Include, None, None) => RelationKind::Include,
            (RelationTag::Exclude, None, None) => RelationKind::Exclude,
            (RelationTag::Cancel, None, None) => RelationKind::Cancel,
            (RelationTag::Value, None, None) => RelationKind::Value,
            _ => {
                return Err(schema(format!(
                    "relation {} -> {}: only conditions take `delay` and only responses take `deadline`",
                    r.source, r.target
                )))
            }
        };
        let guard = match r.guard {
            Some(text) => Some(parse_expr(&text).map_err(|err| {
                schema(format!("guard of {} -> {}: {}", r.source, r.target, err.message))
            })?),
            None => None,
        };
        relations.push(Relation {
            kind,
            source: r.source,
            target: r.target,
            guard,
        });
    }

    let mut initial = doc.initial;
    initial.values.retain(|_, v: &mut Value| v.is_defined());
    Ok(Graph::new(doc.name, doc.roles, events, relations, initial))
}
