//! Structural checks on graphs.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::Serialize;

use crate::expr::{infer_guard_type_is_bool, static_check};
use crate::model::{EventId, EventKind, Graph, RelationKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingCode {
    DuplicateEvent,
    UnknownEvent,
    SubprocessCycle,
    EmptyRole,
    Expression,
    GuardType,
    NeverIncluded,
    UndeclaredRole,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub code: FindingCode,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub errors: Vec<Finding>,
    pub warnings: Vec<Finding>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.errors.is_empty()
    }

    fn error(&mut self, code: FindingCode, message: String) {
        self.errors.push(Finding { code, message });
    }

    fn warn(&mut self, code: FindingCode, message: String) {
        self.warnings.push(Finding { code, message });
    }
}

pub fn validate(graph: &Graph) -> ValidationReport {
    let mut report = ValidationReport::default();
    let known = |id: &EventId| graph.contains(id);

    let mut seen = HashSet::new();
    for event in graph.events() {
        if !seen.insert(&event.id) {
            report.error(
                FindingCode::DuplicateEvent,
                format!("duplicate event `{}`", event.id),
            );
        }
        if event.label.roles.iter().any(String::is_empty) {
            report.error(
                FindingCode::EmptyRole,
                format!("event `{}` has an empty role name", event.id),
            );
        }
        if let Some(parent) = &event.parent {
            if !known(parent) {
                report.error(
                    FindingCode::UnknownEvent,
                    format!("unknown event `{parent}` used as parent of `{}`", event.id),
                );
            }
        }
        if let EventKind::Computation(expr) = &event.kind {
            for diag in static_check(expr, graph) {
                report.error(
                    FindingCode::Expression,
                    format!("computation of `{}`: {diag}", event.id),
                );
            }
        }
    }

    for cycle in subprocess_cycles(graph) {
        let members: Vec<_> = cycle.iter().map(EventId::as_str).collect();
        report.error(
            FindingCode::SubprocessCycle,
            format!("sub-process cycle through {}", members.join(", ")),
        );
    }

    for rel in graph.relations() {
        let kw = rel.kind.keyword();
        for end in [&rel.source, &rel.target] {
            if !known(end) {
                report.error(
                    FindingCode::UnknownEvent,
                    format!("unknown event `{end}` in {kw} {} -> {}", rel.source, rel.target),
                );
            }
        }
        if let Some(guard) = &rel.guard {
            for diag in static_check(guard, graph) {
                report.error(
                    FindingCode::Expression,
                    format!("guard of {kw} {} -> {}: {diag}", rel.source, rel.target),
                );
            }
            if !infer_guard_type_is_bool(guard, graph) {
                report.error(
                    FindingCode::GuardType,
                    format!(
                        "guard of {kw} {} -> {} is not boolean: `{guard}`",
                        rel.source, rel.target
                    ),
                );
            }
        }
    }

    let marking = graph.initial_marking();
    for id in marking.mentioned_ids() {
        if !known(id) {
            report.error(
                FindingCode::UnknownEvent,
                format!("unknown event `{id}` in initial marking"),
            );
        }
    }

    let include_targets: BTreeSet<&EventId> = graph
        .relations()
        .iter()
        .filter(|r| r.kind == RelationKind::Include)
        .map(|r| &r.target)
        .collect();
    for event in graph.events() {
        if !marking.is_included(&event.id) && !include_targets.contains(&event.id) {
            report.warn(
                FindingCode::NeverIncluded,
                format!(
                    "event `{}` is initially excluded and nothing includes it",
                    event.id
                ),
            );
        }
    }

    let declared: BTreeSet<&str> = graph.declared_roles().iter().map(String::as_str).collect();
    if !declared.is_empty() {
        for event in graph.events() {
            for role in &event.label.roles {
                if !declared.contains(role.as_str()) {
                    report.warn(
                        FindingCode::UndeclaredRole,
                        format!("event `{}` uses undeclared role `{role}`", event.id),
                    );
                }
            }
        }
    }

    report
}

/// Each parent cycle once, as the sorted set of its members.
fn subprocess_cycles(graph: &Graph) -> Vec<BTreeSet<EventId>> {
    let mut cycles: Vec<BTreeSet<EventId>> = Vec::new();
    for event in graph.events() {
        let mut chain = vec![&event.id];
        let mut current = &event.id;
        while let Some(parent) = graph.parent(current) {
            if let Some(pos) = chain.iter().position(|e| *e == parent) {
                let cycle: BTreeSet<EventId> = chain[pos..].iter().map(|e| (*e).clone()).collect();
                if !cycles.contains(&cycle) {
                    cycles.push(cycle);
                }
                break;
            }
            chain.push(parent);
            current = parent;
        }
    }
    cycles
}
