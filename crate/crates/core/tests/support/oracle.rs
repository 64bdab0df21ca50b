//! A deliberately naive evaluator: every question is answered by scanning the
//! full relation list, with no indexes or shared code paths.

use std::collections::BTreeMap;

use dcr_core::expr::{eval, eval_guard, EvalError, ValueSource};
use dcr_core::{Deadline, EventId, EventKind, Graph, Marking, RelationKind, Value};

struct View<'a>(&'a Graph, &'a Marking);

impl ValueSource for View<'_> {
    fn value_of(&self, id: &EventId) -> Result<Option<&Value>, EvalError> {
        if self.0.events().iter().any(|e| &e.id == id) {
            Ok(self.1.values.get(id))
        } else {
            Err(EvalError::UnknownEvent(id.clone()))
        }
    }
}

fn guard_holds(g: &Graph, m: &Marking, guard: Option<&dcr_core::Expr>) -> bool {
    eval_guard(guard, &View(g, m)).holds
}

fn lookup<'a>(g: &'a Graph, id: &EventId) -> Option<&'a dcr_core::Event> {
    g.events().iter().find(|e| &e.id == id)
}

pub fn enabled(g: &Graph, m: &Marking, e: &EventId, role: &str) -> bool {
    enabled_depth(g, m, e, role, g.events().len() + 1)
}

fn enabled_depth(g: &Graph, m: &Marking, e: &EventId, role: &str, fuel: usize) -> bool {
    let Some(ev) = lookup(g, e) else { return false };
    if fuel == 0 {
        return true;
    }
    if !ev.label.roles.is_empty() && !ev.label.roles.contains(role) {
        return false;
    }
    if !m.included.contains(e) {
        return false;
    }
    for r in g.relations() {
        if &r.target != e || !m.included.contains(&r.source) || !guard_holds(g, m, r.guard.as_ref()) {
            continue;
        }
        match r.kind {
            RelationKind::Condition { delay } => match m.executed.get(&r.source) {
                Some(age) if *age >= delay.steps() => {}
                _ => return false,
            },
            RelationKind::Milestone if m.required.contains_key(&r.source) => return false,
            _ => {}
        }
    }
    match &ev.parent {
        None => true,
        Some(p) => lookup(g, p).is_some() && enabled_depth(g, m, p, role, fuel - 1),
    }
}

fn fire(g: &Graph, m: &mut Marking, source: &EventId) {
    m.executed.insert(source.clone(), 0);
    m.required.remove(source);
    let snap = m.clone();
    let firing: Vec<_> = g
        .relations()
        .iter()
        .filter(|r| &r.source == source && guard_holds(g, &snap, r.guard.as_ref()))
        .collect();
    for r in &firing {
        if r.kind == RelationKind::Value {
            match snap.values.get(source) {
                Some(v) => m.values.insert(r.target.clone(), v.clone()),
                None => m.values.remove(&r.target),
            };
        }
    }
    for r in &firing {
        if r.kind == RelationKind::Cancel {
            m.required.remove(&r.target);
        }
    }
    let mut responses: BTreeMap<EventId, Deadline> = BTreeMap::new();
    for r in &firing {
        if let RelationKind::Response { deadline } = r.kind {
            let entry = responses.entry(r.target.clone()).or_insert(deadline);
            if deadline < *entry {
                *entry = deadline;
            }
        }
    }
    m.required.extend(responses);
    for r in &firing {
        if r.kind == RelationKind::Exclude {
            m.included.remove(&r.target);
        }
    }
    for r in &firing {
        if r.kind == RelationKind::Include {
            m.included.insert(r.target.clone());
        }
    }
}

fn inside(g: &Graph, e: &EventId, p: &EventId) -> bool {
    let mut cur = lookup(g, e).and_then(|ev| ev.parent.clone());
    let mut fuel = g.events().len() + 1;
    while let Some(c) = cur {
        if &c == p {
            return true;
        }
        if fuel == 0 {
            return false;
        }
        fuel -= 1;
        cur = lookup(g, &c).and_then(|ev| ev.parent.clone());
    }
    false
}

/// `None` when the event may not be executed with this input.
pub fn execute(g: &Graph, m: &Marking, e: &EventId, role: &str, input: Option<Value>) -> Option<Marking> {
    if !enabled(g, m, e, role) {
        return None;
    }
    let ev = lookup(g, e)?;
    let input = input.filter(|v| *v != Value::Undefined);
    let value = match (&ev.kind, input) {
        (EventKind::Input, Some(v)) => Some(v),
        (EventKind::Computation(x), None) => Some(eval(x, &View(g, m)).ok()?),
        (EventKind::Simple, None) => None,
        _ => return None,
    };
    let mut next = m.clone();
    if let Some(v) = value {
        if v == Value::Undefined {
            next.values.remove(e);
        } else {
            next.values.insert(e.clone(), v);
        }
    }
    fire(g, &mut next, e);
    let mut done: Vec<EventId> = Vec::new();
    let mut cur = ev.parent.clone();
    while let Some(p) = cur {
        if lookup(g, &p).is_none() || done.contains(&p) {
            break;
        }
        let busy = g
            .events()
            .iter()
            .any(|d| inside(g, &d.id, &p) && next.included.contains(&d.id) && next.required.contains_key(&d.id));
        if busy {
            break;
        }
        fire(g, &mut next, &p);
        done.push(p.clone());
        cur = lookup(g, &p).and_then(|ev| ev.parent.clone());
    }
    Some(next)
}

pub fn advance(m: &Marking, delta: u64) -> Option<Marking> {
    for (e, d) in &m.required {
        if let Deadline::Finite(d) = d {
            if m.included.contains(e) && *d < delta {
                return None;
            }
        }
    }
    let mut next = m.clone();
    for age in next.executed.values_mut() {
        *age += delta;
    }
    for d in next.required.values_mut() {
        if let Deadline::Finite(x) = d {
            *x = x.saturating_sub(delta);
        }
    }
    Some(next)
}

pub fn accepting(m: &Marking) -> bool {
    !m.required.keys().any(|e| m.included.contains(e))
}
