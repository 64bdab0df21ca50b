use std::collections::{BTreeSet, HashMap};

use super::{EventId, Label, Marking};
use crate::duration::{Deadline, Duration};
use crate::expr::Expr;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EventKind {
    /// Receives a value from the environment on execution.
    Input,
    /// Evaluates the expression on execution and stores the result.
    Computation(Expr),
    Simple,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: EventId,
    pub label: Label,
    pub kind: EventKind,
    /// Enclosing sub-process event, if any.
    pub parent: Option<EventId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelationKind {
    Condition { delay: Duration },
    Response { deadline: Deadline },
    Milestone,
    Include,
    Exclude,
    Cancel,
    Value,
}

impl RelationKind {
    pub fn keyword(self) -> &'static str {
        match self {
            RelationKind::Condition { .. } => "condition",
            RelationKind::Response { .. } => "response",
            RelationKind::Milestone => "milestone",
            RelationKind::Include => "include",
            RelationKind::Exclude => "exclude",
            RelationKind::Cancel => "cancel",
            RelationKind::Value => "value",
        }
    }

    pub fn condition() -> Self {
        RelationKind::Condition {
            delay: Duration::ZERO,
        }
    }

    pub fn response() -> Self {
        RelationKind::Response {
            deadline: Deadline::Infinity,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Relation {
    pub kind: RelationKind,
    pub source: EventId,
    pub target: EventId,
    /// `None` behaves as the constant `true`.
    pub guard: Option<Expr>,
}

/// An immutable timed DCR graph with data, sub-processes and roles.
///
/// Construction never fails: structural problems (unknown ids, cyclic
/// nesting, ...) are representable and reported by [`crate::validate`].
/// Lookups resolve duplicate ids to their first declaration.
#[derive(Debug, Clone)]
pub struct Graph {
    name: String,
    roles: Vec<String>,
    events: Vec<Event>,
    relations: Vec<Relation>,
    initial: Marking,
    index: GraphIndex,
}

#[derive(Debug, Clone, Default)]
struct GraphIndex {
    position: HashMap<EventId, usize>,
    conditions_into: Vec<Vec<usize>>,
    milestones_into: Vec<Vec<usize>>,
    outgoing: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
}

impl GraphIndex {
    fn build(events: &[Event], relations: &[Relation]) -> Self {
        let mut position = HashMap::with_capacity(events.len());
        for (i, e) in events.iter().enumerate() {
            position.entry(e.id.clone()).or_insert(i);
        }
        let n = events.len();
        let mut index = GraphIndex {
            position,
            conditions_into: vec![Vec::new(); n],
            milestones_into: vec![Vec::new(); n],
            outgoing: vec![Vec::new(); n],
            children: vec![Vec::new(); n],
        };
        for (r, rel) in relations.iter().enumerate() {
            if let Some(&s) = index.position.get(&rel.source) {
                index.outgoing[s].push(r);
            }
            if let Some(&t) = index.position.get(&rel.target) {
                match rel.kind {
                    RelationKind::Condition { .. } => index.conditions_into[t].push(r),
                    RelationKind::Milestone => index.milestones_into[t].push(r),
                    _ => {}
                }
            }
        }
        for (i, e) in events.iter().enumerate() {
            if index.position.get(&e.id) != Some(&i) {
                continue;
            }
            if let Some(p) = e.parent.as_ref().and_then(|p| index.position.get(p)) {
                index.children[*p].push(i);
            }
        }
        index
    }
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.roles == other.roles
            && self.events == other.events
            && self.relations == other.relations
            && self.initial == other.initial
    }
}

impl Eq for Graph {}

impl Graph {
    pub fn new(
        name: impl Into<String>,
        roles: Vec<String>,
        events: Vec<Event>,
        relations: Vec<Relation>,
        initial: Marking,
    ) -> Self {
        let index = GraphIndex::build(&events, &relations);
        Graph {
            name: name.into(),
            roles,
            events,
            relations,
            initial,
            index,
        }
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Graph::new(name, Vec::new(), Vec::new(), Vec::new(), Marking::default())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Roles declared up front (events may still mention others).
    pub fn declared_roles(&self) -> &[String] {
        &self.roles
    }

    /// Declared roles plus every role named on an event label, sorted.
    pub fn all_roles(&self) -> BTreeSet<&str> {
        self.roles
            .iter()
            .map(String::as_str)
            .chain(self.events.iter().flat_map(|e| e.label.roles.iter().map(String::as_str)))
            .collect()
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn initial_marking(&self) -> &Marking {
        &self.initial
    }

    pub fn event(&self, id: &EventId) -> Option<&Event> {
        self.index.position.get(id).map(|&i| &self.events[i])
    }

    pub fn event_by_name(&self, id: &str) -> Option<&Event> {
        self.index.position.get(id).map(|&i| &self.events[i])
    }

    pub fn contains(&self, id: &EventId) -> bool {
        self.index.position.contains_key(id)
    }

    fn relations_at<'a>(&'a self, id: &EventId, table: &'a [Vec<usize>]) -> impl Iterator<Item = &'a Relation> + 'a {
        self.index
            .position
            .get(id)
            .map(|&i| table[i].as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&r| &self.relations[r])
    }

    /// Conditions whose target is `id`.
    pub fn conditions_into<'a>(&'a self, id: &EventId) -> impl Iterator<Item = &'a Relation> + 'a {
        self.relations_at(id, &self.index.conditions_into)
    }

    /// Milestones whose target is `id`.
    pub fn milestones_into<'a>(&'a self, id: &EventId) -> impl Iterator<Item = &'a Relation> + 'a {
        self.relations_at(id, &self.index.milestones_into)
    }

    /// Relations of every kind whose source is `id`, in declaration order.
    pub fn outgoing<'a>(&'a self, id: &EventId) -> impl Iterator<Item = &'a Relation> + 'a {
        self.relations_at(id, &self.index.outgoing)
    }

    /// Events directly contained in `id`.
    pub fn children<'a>(&'a self, id: &EventId) -> impl Iterator<Item = &'a Event> + 'a {
        self.index
            .position
            .get(id)
            .map(|&i| self.index.children[i].as_slice())
            .unwrap_or(&[])
            .iter()
            .map(move |&c| &self.events[c])
    }

    /// Events transitively contained in `id`. Terminates on cyclic nesting.
    pub fn descendants(&self, id: &EventId) -> Vec<&EventId> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![id];
        let mut out = Vec::new();
        while let Some(current) = stack.pop() {
            for child in self.children(current) {
                if seen.insert(&child.id) {
                    out.push(&child.id);
                    stack.push(&child.id);
                }
            }
        }
        out
    }

    pub fn parent(&self, id: &EventId) -> Option<&EventId> {
        self.event(id).and_then(|e| e.parent.as_ref())
    }

    pub fn is_subprocess(&self, id: &EventId) -> bool {
        self.children(id).next().is_some()
    }

    /// Copy of this graph with a different initial marking.
    pub fn with_initial(&self, initial: Marking) -> Graph {
        Graph {
            initial,
            ..self.clone()
        }
    }
}

/// Fluent construction of graphs, used by the pattern catalog and tests.
///
/// Event ids are given as string literals and must be valid identifiers;
/// an invalid id panics.
#[derive(Debug, Default)]
pub struct GraphBuilder {
    name: String,
    roles: Vec<String>,
    events: Vec<EventDraft>,
    relations: Vec<Relation>,
}

#[derive(Debug)]
pub struct EventDraft {
    event: Event,
    included: bool,
    executed: Option<u64>,
    pending: Option<Deadline>,
    value: Option<crate::expr::Value>,
}

impl EventDraft {
    pub fn label(&mut self, action: impl Into<String>) -> &mut Self {
        self.event.label.action = action.into();
        self
    }

    pub fn roles<I, S>(&mut self, roles: I) -> &mut Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.event.label.roles.extend(roles.into_iter().map(Into::into));
        self
    }

    pub fn excluded(&mut self) -> &mut Self {
        self.included = false;
        self
    }

    pub fn executed(&mut self) -> &mut Self {
        self.executed = Some(0);
        self
    }

    pub fn pending(&mut self, deadline: Deadline) -> &mut Self {
        self.pending = Some(deadline);
        self
    }

    pub fn value(&mut self, value: crate::expr::Value) -> &mut Self {
        self.value = Some(value);
        self
    }

    pub fn parent(&mut self, parent: &str) -> &mut Self {
        self.event.parent = Some(id(parent));
        self
    }
}

fn id(s: &str) -> EventId {
    EventId::new(s).unwrap_or_else(|e| panic!("{e}"))
}

impl GraphBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        GraphBuilder {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn role(&mut self, role: impl Into<String>) -> &mut Self {
        self.roles.push(role.into());
        self
    }

    pub fn event(&mut self, event_id: &str, kind: EventKind) -> &mut EventDraft {
        self.events.push(EventDraft {
            event: Event {
                id: id(event_id),
                label: Label::new(event_id),
                kind,
                parent: None,
            },
            included: true,
            executed: None,
            pending: None,
            value: None,
        });
        self.events.last_mut().expect("just pushed")
    }

    pub fn input(&mut self, event_id: &str) -> &mut EventDraft {
        self.event(event_id, EventKind::Input)
    }

    pub fn simple(&mut self, event_id: &str) -> &mut EventDraft {
        self.event(event_id, EventKind::Simple)
    }

    pub fn compute(&mut self, event_id: &str, expr: Expr) -> &mut EventDraft {
        self.event(event_id, EventKind::Computation(expr))
    }

    pub fn relation(&mut self, kind: RelationKind, source: &str, target: &str) -> &mut Relation {
        self.relations.push(Relation {
            kind,
            source: id(source),
            target: id(target),
            guard: None,
        });
        self.relations.last_mut().expect("just pushed")
    }

    pub fn condition(&mut self, source: &str, target: &str) -> &mut Relation {
        self.relation(RelationKind::condition(), source, target)
    }

    pub fn condition_after(&mut self, source: &str, target: &str, delay: Duration) -> &mut Relation {
        self.relation(RelationKind::Condition { delay }, source, target)
    }

    pub fn response(&mut self, source: &str, target: &str) -> &mut Relation {
        self.relation(RelationKind::response(), source, target)
    }

    pub fn response_within(&mut self, source: &str, target: &str, deadline: Deadline) -> &mut Relation {
        self.relation(RelationKind::Response { deadline }, source, target)
    }

    pub fn milestone(&mut self, source: &str, target: &str) -> &mut Relation {
        self.relation(RelationKind::Milestone, source, target)
    }

    pub fn include(&mut self, source: &str, target: &str) -> &mut Relation {
        self.relation(RelationKind::Include, source, target)
    }

    pub fn exclude(&mut self, source: &str, target: &str) -> &mut Relation {
        self.relation(RelationKind::Exclude, source, target)
    }

    pub fn cancel(&mut self, source: &str, target: &str) -> &mut Relation {
        self.relation(RelationKind::Cancel, source, target)
    }

    pub fn value(&mut self, source: &str, target: &str) -> &mut Relation {
        self.relation(RelationKind::Value, source, target)
    }

    pub fn build(&self) -> Graph {
        let mut initial = Marking::default();
        for draft in &self.events {
            let id = &draft.event.id;
            if draft.included {
                initial.included.insert(id.clone());
            }
            if let Some(age) = draft.executed {
                initial.executed.insert(id.clone(), age);
            }
            if let Some(deadline) = draft.pending {
                initial.required.insert(id.clone(), deadline);
            }
            if let Some(value) = &draft.value {
                initial.set_value(id, value.clone());
            }
        }
        Graph::new(
            self.name.clone(),
            self.roles.clone(),
            self.events.iter().map(|d| d.event.clone()).collect(),
            self.relations.clone(),
            initial,
        )
    }
}

impl Relation {
    pub fn guard(&mut self, guard: Expr) -> &mut Self {
        self.guard = Some(guard);
        self
    }
}
