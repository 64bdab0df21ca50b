use std::fmt::Write;

use crate::duration::{format_duration, Deadline, Duration};
use crate::model::{EventKind, Graph, RelationKind};

/// Canonical DSL text: roles first, then events and relations in declaration order.
pub fn serialize_graph(graph: &Graph) -> String {
    let mut out = String::new();
    let marking = graph.initial_marking();
    let _ = writeln!(out, "graph {} {{", graph.name());
    if !graph.declared_roles().is_empty() {
        let _ = writeln!(out, "  roles {};", graph.declared_roles().join(", "));
    }
    for event in graph.events() {
        let id = &event.id;
        let _ = write!(out, "  event {id}");
        if event.label.action != id.as_str() {
            out.push(' ');
            let _ = crate::expr::write_quoted(&mut out, &event.label.action);
        }
        match &event.kind {
            EventKind::Input => out.push_str(" input"),
            EventKind::Computation(expr) => {
                let _ = write!(out, " compute ({expr})");
            }
            EventKind::Simple => {}
        }
        if !event.label.roles.is_empty() {
            let roles: Vec<&str> = event.label.roles.iter().map(String::as_str).collect();
            let _ = write!(out, " roles [{}]", roles.join(", "));
        }
        if !marking.is_included(id) {
            out.push_str(" excluded");
        }
        match marking.executed_age(id) {
            Some(0) => out.push_str(" executed"),
            Some(age) => {
                let _ = write!(out, " executed {}", format_duration(Duration::from_steps(age)));
            }
            None => {}
        }
        match marking.deadline(id) {
            Some(Deadline::Infinity) => out.push_str(" pending"),
            Some(Deadline::Finite(steps)) => {
                let _ = write!(out, " pending {}", format_duration(Duration::from_steps(steps)));
            }
            None => {}
        }
        if let Some(value) = marking.value(id) {
            let _ = write!(out, " value {value}");
        }
        if let Some(parent) = &event.parent {
            let _ = write!(out, " in {parent}");
        }
        out.push_str(";\n");
    }
    for rel in graph.relations() {
        let _ = write!(out, "  {} {} -> {}", rel.kind.keyword(), rel.source, rel.target);
        match rel.kind {
            RelationKind::Condition { delay } if delay != Duration::ZERO => {
                let _ = write!(out, " delay {}", format_duration(delay));
            }
            RelationKind::Response {
                deadline: Deadline::Finite(steps),
            } => {
                let _ = write!(out, " deadline {}", format_duration(Duration::from_steps(steps)));
            }
            _ => {}
        }
        if let Some(guard) = &rel.guard {
            let _ = write!(out, " guard ({guard})");
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}
