//! Graphviz rendering.

use std::collections::BTreeMap;
use std::fmt::Write;

use crate::duration::{format_duration, Deadline, Duration};
use crate::model::{Event, EventId, EventKind, Graph, Marking, RelationKind};

fn edge_style(kind: RelationKind) -> (&'static str, &'static str, &'static str) {
    // (colour, arrowhead, symbol)
    match kind {
        RelationKind::Condition { .. } => ("orange", "dotnormal", "•"),
        RelationKind::Response { .. } => ("blue", "normal", "•→"),
        RelationKind::Milestone => ("purple", "odiamond", "◇"),
        RelationKind::Include => ("forestgreen", "normal", "+"),
        RelationKind::Exclude => ("red", "normal", "%"),
        RelationKind::Cancel => ("brown", "normal", "×"),
        RelationKind::Value => ("grey40", "normal", "="),
    }
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

fn node_line(event: &Event, marking: &Marking, indent: &str) -> String {
    let id = &event.id;
    let mut label = String::new();
    if marking.executed_age(id).is_some() {
        label.push_str("✓ ");
    }
    if marking.is_required(id) {
        label.push_str("! ");
    }
    label.push_str(&event.label.action);
    if !event.label.roles.is_empty() {
        let roles: Vec<&str> = event.label.roles.iter().map(String::as_str).collect();
        let _ = write!(label, "\n[{}]", roles.join(", "));
    }
    match &event.kind {
        EventKind::Input => label.push_str("\n?"),
        EventKind::Computation(expr) => {
            let _ = write!(label, "\n:= {expr}");
        }
        EventKind::Simple => {}
    }
    if let Some(value) = marking.value(id) {
        let _ = write!(label, "\n= {value}");
    }
    let style = if marking.is_included(id) { "solid" } else { "dashed" };
    format!("{indent}{} [label={}, style={style}];\n", quote(id.as_str()), quote(&label))
}

/// DOT text for `graph`, showing `marking` (or the initial marking).
pub fn export_dot(graph: &Graph, marking: Option<&Marking>) -> String {
    let marking = marking.unwrap_or(graph.initial_marking());
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(graph.name()));
    out.push_str("  node [shape=box];\n");

    let mut children: BTreeMap<Option<&EventId>, Vec<&Event>> = BTreeMap::new();
    for event in graph.events() {
        let parent = event.parent.as_ref().filter(|p| graph.contains(p));
        children.entry(parent).or_default().push(event);
    }
    let mut visited = std::collections::HashSet::new();
    write_level(&mut out, marking, &children, None, 1, &mut visited);
    // Events stuck in a parent cycle are unreachable from the roots.
    for event in graph.events() {
        if !visited.contains(&event.id) {
            out.push_str(&node_line(event, marking, "  "));
        }
    }

    for rel in graph.relations() {
        let (colour, head, symbol) = edge_style(rel.kind);
        let mut label = symbol.to_string();
        match rel.kind {
            RelationKind::Condition { delay } if delay != Duration::ZERO => {
                let _ = write!(label, " {}", format_duration(delay));
            }
            RelationKind::Response {
                deadline: Deadline::Finite(steps),
            } => {
                let _ = write!(label, " {}", format_duration(Duration::from_steps(steps)));
            }
            _ => {}
        }
        if let Some(guard) = &rel.guard {
            let _ = write!(label, " [{guard}]");
        }
        let _ = writeln!(
            out,
            "  {} -> {} [color={colour}, arrowhead={head}, label={}];",
            quote(rel.source.as_str()),
            quote(rel.target.as_str()),
            quote(&label)
        );
    }
    out.push_str("}\n");
    out
}

fn write_level<'a>(
    out: &mut String,
    marking: &Marking,
    children: &BTreeMap<Option<&'a EventId>, Vec<&'a Event>>,
    parent: Option<&'a EventId>,
    depth: usize,
    visited: &mut std::collections::HashSet<&'a EventId>,
) {
    let indent = "  ".repeat(depth);
    let Some(level) = children.get(&parent) else {
        return;
    };
    for event in level {
        if !visited.insert(&event.id) {
            continue;
        }
        if children.contains_key(&Some(&event.id)) {
            let _ = writeln!(out, "{indent}subgraph {} {{", quote(&format!("cluster_{}", event.id)));
            let _ = writeln!(out, "{indent}  label={};", quote(&event.label.action));
            out.push_str(&node_line(event, marking, &format!("{indent}  ")));
            write_level(out, marking, children, Some(&event.id), depth + 1, visited);
            let _ = writeln!(out, "{indent}}}");
        } else {
            out.push_str(&node_line(event, marking, &indent));
        }
    }
}
