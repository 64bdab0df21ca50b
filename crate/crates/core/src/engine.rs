//! Enabledness, event execution, time advancement and acceptance.
//!
//! Every operation is pure: it borrows the marking and returns a new one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use crate::duration::{Deadline, Duration};
use crate::expr::{eval, eval_guard, EvalError, Value, ValueSource};
use crate::model::{EventId, EventKind, Graph, Marking, RelationKind};

/// Resolves event references against a graph's events and a marking's values.
pub struct Scope<'a> {
    pub graph: &'a Graph,
    pub marking: &'a Marking,
}

impl ValueSource for Scope<'_> {
    fn value_of(&self, id: &EventId) -> Result<Option<&Value>, EvalError> {
        if self.graph.contains(id) {
            Ok(self.marking.value(id))
        } else {
            Err(EvalError::UnknownEvent(id.clone()))
        }
    }
}

/// Which enabledness clause failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Clause {
    Role,
    Included,
    Condition,
    Milestone,
    Parent,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::Role => "role",
            Clause::Included => "included",
            Clause::Condition => "condition",
            Clause::Milestone => "milestone",
            Clause::Parent => "parent",
        })
    }
}

/// Why an event cannot be executed right now.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Blocker {
    Role { event: EventId, role: String },
    Excluded { event: EventId },
    Condition { source: EventId, delay: Duration, age: Option<u64> },
    Milestone { source: EventId },
    Parent { parent: EventId, cause: Box<Blocker> },
}

impl Blocker {
    pub fn clause(&self) -> Clause {
        match self {
            Blocker::Role { .. } => Clause::Role,
            Blocker::Excluded { .. } => Clause::Included,
            Blocker::Condition { .. } => Clause::Condition,
            Blocker::Milestone { .. } => Clause::Milestone,
            Blocker::Parent { .. } => Clause::Parent,
        }
    }
}

impl fmt::Display for Blocker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Blocker::Role { event, role } => write!(f, "role `{role}` may not execute `{event}`"),
            Blocker::Excluded { event } => write!(f, "`{event}` is excluded"),
            Blocker::Condition { source, delay, age } => match age {
                None => write!(f, "condition `{source}` has not been executed"),
                Some(age) => write!(
                    f,
                    "condition `{source}` executed {age} step(s) ago, needs {}",
                    delay.steps()
                ),
            },
            Blocker::Milestone { source } => write!(f, "milestone `{source}` is pending"),
            Blocker::Parent { parent, cause } => {
                write!(f, "sub-process `{parent}` is not enabled: {cause}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExecError {
    #[error("unknown event `{0}`")]
    UnknownEvent(EventId),
    #[error("`{event}` is not enabled: {blocker}")]
    NotEnabled { event: EventId, blocker: Blocker },
    #[error("input event `{0}` needs a value")]
    MissingInput(EventId),
    #[error("`{0}` is not an input event and takes no value")]
    UnexpectedInput(EventId),
    #[error("computing `{event}` from `{expr}` failed: {source}")]
    Evaluation {
        event: EventId,
        expr: String,
        source: EvalError,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TimeError {
    #[error("advancing time would miss deadlines: {}", describe_violations(.0))]
    DeadlineViolation(Vec<(EventId, u64)>),
    #[error("execution age of `{0}` overflows")]
    Overflow(EventId),
}

fn describe_violations(v: &[(EventId, u64)]) -> String {
    v.iter()
        .map(|(id, d)| format!("{id} (deadline {d})"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Everything an execution changed, including sub-process completions.
///
/// `included` and `excluded` are the targets of effects that fired; when a
/// target appears in both, the inclusion won.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EffectReport {
    pub executed_event: EventId,
    pub new_value: Option<Value>,
    pub included: BTreeSet<EventId>,
    pub excluded: BTreeSet<EventId>,
    pub responses_set: BTreeMap<EventId, Deadline>,
    pub cancelled: BTreeSet<EventId>,
    pub values_copied: BTreeMap<EventId, Value>,
    pub completed_subprocesses: Vec<EventId>,
    /// Guards that were coerced to false, with the reason.
    pub diagnostics: Vec<String>,
}

impl EffectReport {
    fn new(event: &EventId) -> Self {
        EffectReport {
            executed_event: event.clone(),
            new_value: None,
            included: BTreeSet::new(),
            excluded: BTreeSet::new(),
            responses_set: BTreeMap::new(),
            cancelled: BTreeSet::new(),
            values_copied: BTreeMap::new(),
            completed_subprocesses: Vec::new(),
            diagnostics: Vec::new(),
        }
    }
}

/// Checks the enabledness clauses in order (role, included, conditions,
/// milestones, enclosing sub-process) and reports the first failure.
pub fn check_enabled(
    graph: &Graph,
    marking: &Marking,
    event: &EventId,
    role: &str,
) -> Result<(), ExecError> {
    let mut seen = BTreeSet::new();
    check_enabled_inner(graph, marking, event, role, &mut seen).map_err(|blocker| {
        match blocker {
            Some(blocker) => ExecError::NotEnabled {
                event: event.clone(),
                blocker,
            },
            None => ExecError::UnknownEvent(event.clone()),
        }
    })
}

// `None` signals an unknown event id.
fn check_enabled_inner<'a>(
    graph: &'a Graph,
    marking: &Marking,
    event: &'a EventId,
    role: &str,
    seen: &mut BTreeSet<&'a EventId>,
) -> Result<(), Option<Blocker>> {
    let ev = graph.event(event).ok_or(None)?;
    if !ev.label.permits(role) {
        return Err(Some(Blocker::Role {
            event: event.clone(),
            role: role.to_string(),
        }));
    }
    if !marking.is_included(event) {
        return Err(Some(Blocker::Excluded {
            event: event.clone(),
        }));
    }
    let scope = Scope { graph, marking };
    for rel in graph.conditions_into(event) {
        let RelationKind::Condition { delay } = rel.kind else {
            continue;
        };
        if !marking.is_included(&rel.source) || !eval_guard(rel.guard.as_ref(), &scope).holds {
            continue;
        }
        let age = marking.executed_age(&rel.source);
        if !age.is_some_and(|a| a >= delay.steps()) {
            return Err(Some(Blocker::Condition {
                source: rel.source.clone(),
                delay,
                age,
            }));
        }
    }
    for rel in graph.milestones_into(event) {
        if marking.is_included(&rel.source)
            && eval_guard(rel.guard.as_ref(), &scope).holds
            && marking.is_required(&rel.source)
        {
            return Err(Some(Blocker::Milestone {
                source: rel.source.clone(),
            }));
        }
    }
    if let Some(parent) = &ev.parent {
        // Cyclic nesting is a validation error; stop rather than recurse forever.
        if !seen.insert(event) {
            return Ok(());
        }
        if let Err(cause) = check_enabled_inner(graph, marking, parent, role, seen) {
            // An unknown parent can never be enabled.
            let cause = cause.unwrap_or_else(|| Blocker::Excluded {
                event: parent.clone(),
            });
            return Err(Some(Blocker::Parent {
                parent: parent.clone(),
                cause: Box::new(cause),
            }));
        }
    }
    Ok(())
}

pub fn is_enabled(
    graph: &Graph,
    marking: &Marking,
    event: &EventId,
    role: &str,
) -> Result<bool, ExecError> {
    match check_enabled(graph, marking, event, role) {
        Ok(()) => Ok(true),
        Err(ExecError::NotEnabled { .. }) => Ok(false),
        Err(other) => Err(other),
    }
}

pub fn enabled_events(graph: &Graph, marking: &Marking, role: &str) -> BTreeSet<EventId> {
    graph
        .events()
        .iter()
        .filter(|e| check_enabled(graph, marking, &e.id, role).is_ok())
        .map(|e| e.id.clone())
        .collect()
}

/// Executes `event` as `role`. `input` must be given exactly for input events.
///
/// Effects: the event's new value is computed against the pre-execution
/// marking; it is marked executed and no longer required; then every
/// outgoing relation whose guard holds in that updated marking fires
/// (value copies, cancels, responses, exclusions, inclusions in that
/// order, so an inclusion beats an exclusion of the same target). Finally
/// enclosing sub-processes with no included and required descendants
/// complete, innermost first, firing their own effects.
pub fn execute(
    graph: &Graph,
    marking: &Marking,
    event: &EventId,
    role: &str,
    input: Option<Value>,
) -> Result<(Marking, EffectReport), ExecError> {
    check_enabled(graph, marking, event, role)?;
    let ev = graph.event(event).ok_or_else(|| ExecError::UnknownEvent(event.clone()))?;
    let input = input.filter(Value::is_defined);
    let new_value = match (&ev.kind, input) {
        (EventKind::Input, Some(v)) => Some(v),
        (EventKind::Input, None) => return Err(ExecError::MissingInput(event.clone())),
        (_, Some(_)) => return Err(ExecError::UnexpectedInput(event.clone())),
        (EventKind::Computation(expr), None) => {
            let v = eval(expr, &Scope { graph, marking }).map_err(|source| {
                ExecError::Evaluation {
                    event: event.clone(),
                    expr: expr.to_string(),
                    source,
                }
            })?;
            Some(v)
        }
        (EventKind::Simple, None) => None,
    };

    let mut next = marking.clone();
    let mut report = EffectReport::new(event);
    if let Some(v) = new_value {
        next.set_value(event, v.clone());
        report.new_value = Some(v);
    }
    apply_effects(graph, &mut next, event, &mut report);

    let mut current = event;
    let mut completed = BTreeSet::new();
    while let Some(parent) = graph.parent(current) {
        if !graph.contains(parent) || !completed.insert(parent) {
            break;
        }
        let busy = graph
            .descendants(parent)
            .into_iter()
            .any(|d| next.is_included(d) && next.is_required(d));
        if busy {
            break;
        }
        apply_effects(graph, &mut next, parent, &mut report);
        report.completed_subprocesses.push(parent.clone());
        current = parent;
    }
    Ok((next, report))
}

fn apply_effects(graph: &Graph, marking: &mut Marking, source: &EventId, report: &mut EffectReport) {
    marking.executed.insert(source.clone(), 0);
    marking.required.remove(source);

    let snapshot = marking.clone();
    let scope = Scope {
        graph,
        marking: &snapshot,
    };
    let mut copies = Vec::new();
    let mut cancels = Vec::new();
    let mut responses: BTreeMap<&EventId, Deadline> = BTreeMap::new();
    let mut excludes = Vec::new();
    let mut includes = Vec::new();
    for rel in graph.outgoing(source) {
        let guard = eval_guard(rel.guard.as_ref(), &scope);
        if let Some(diag) = guard.diagnostic {
            report.diagnostics.push(diag);
        }
        if !guard.holds {
            continue;
        }
        match rel.kind {
            RelationKind::Value => copies.push(&rel.target),
            RelationKind::Cancel => cancels.push(&rel.target),
            RelationKind::Response { deadline } => {
                let slot = responses.entry(&rel.target).or_insert(deadline);
                *slot = (*slot).min(deadline);
            }
            RelationKind::Exclude => excludes.push(&rel.target),
            RelationKind::Include => includes.push(&rel.target),
            RelationKind::Condition { .. } | RelationKind::Milestone => {}
        }
    }

    let source_value = snapshot.value(source).cloned().unwrap_or_default();
    for target in copies {
        marking.set_value(target, source_value.clone());
        report.values_copied.insert(target.clone(), source_value.clone());
    }
    for target in cancels {
        marking.required.remove(target);
        report.cancelled.insert(target.clone());
    }
    for (target, deadline) in responses {
        marking.required.insert(target.clone(), deadline);
        report.responses_set.insert(target.clone(), deadline);
    }
    for target in excludes {
        marking.included.remove(target);
        report.excluded.insert(target.clone());
    }
    for target in includes {
        marking.included.insert(target.clone());
        report.included.insert(target.clone());
    }
}

/// Lets `delta` steps pass. Fails if any included required event has a
/// finite deadline shorter than `delta`; excluded events never block.
pub fn advance_time(marking: &Marking, delta: Duration) -> Result<Marking, TimeError> {
    let steps = delta.steps();
    let mut violations: Vec<(EventId, u64)> = marking
        .pending()
        .filter_map(|(id, d)| d.finite().filter(|&d| d < steps).map(|d| (id.clone(), d)))
        .collect();
    if !violations.is_empty() {
        violations.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        return Err(TimeError::DeadlineViolation(violations));
    }
    let mut next = marking.clone();
    for (id, age) in next.executed.iter_mut() {
        *age = age
            .checked_add(steps)
            .ok_or_else(|| TimeError::Overflow(id.clone()))?;
    }
    for deadline in next.required.values_mut() {
        *deadline = deadline.elapse(steps);
    }
    Ok(next)
}

/// Accepting: no included event is still required.
pub fn is_accepting(marking: &Marking) -> bool {
    marking.pending().next().is_none()
}

/// Smallest finite deadline among included required events.
pub fn next_deadline(marking: &Marking) -> Option<(u64, &EventId)> {
    marking
        .pending()
        .filter_map(|(id, d)| d.finite().map(|d| (d, id)))
        .min()
}
