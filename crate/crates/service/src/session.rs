use std::collections::HashMap;
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use dcr_core::conformance::{write_trace, TraceEntry};
use dcr_core::engine::EffectReport;
use dcr_core::{enabled_events, is_accepting, is_enabled, Deadline, EventKind, Graph, Marking, Value};
use serde::Serialize;
use serde_json::{json, Value as Json};
use tokio::sync::broadcast;

/// Role name used to ask whether an event is open to every role.
const ANY_ROLE: &str = "*";

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum HistoryEntry {
    Execute {
        at: u64,
        role: String,
        event: String,
        #[serde(skip_serializing_if = "Option::is_none")]
        input: Option<Value>,
        report: Box<EffectReport>,
    },
    Advance {
        at: u64,
        steps: u64,
    },
}

pub struct Live {
    pub marking: Marking,
    /// Steps elapsed since the session started.
    pub now: u64,
    pub history: Vec<HistoryEntry>,
    touched: Instant,
}

pub struct Session {
    pub id: String,
    pub graph: Graph,
    created_at: SystemTime,
    live: Mutex<Live>,
    notify: broadcast::Sender<Arc<str>>,
}

impl Session {
    fn new(id: String, graph: Graph) -> Self {
        let (notify, _) = broadcast::channel(64);
        Session {
            id,
            live: Mutex::new(Live {
                marking: graph.initial_marking().clone(),
                now: 0,
                history: Vec::new(),
                touched: Instant::now(),
            }),
            graph,
            created_at: SystemTime::now(),
            notify,
        }
    }

    /// Locks the session for a read or a mutation. A poisoned lock still
    /// holds a consistent marking because every mutation replaces it whole.
    pub fn lock(&self) -> MutexGuard<'_, Live> {
        let mut guard = self.live.lock().unwrap_or_else(|e| e.into_inner());
        guard.touched = Instant::now();
        guard
    }

    pub fn subscribe(&self) -> broadcast::Receiver<Arc<str>> {
        self.notify.subscribe()
    }

    pub fn publish(&self, change: &str, live: &Live) {
        let message = json!({ "type": change, "state": self.state(live) }).to_string();
        // Nobody listening is fine.
        let _ = self.notify.send(message.into());
    }

    pub fn reset(&self, live: &mut Live) {
        live.marking = self.graph.initial_marking().clone();
        live.now = 0;
        live.history.clear();
    }

    pub fn state(&self, live: &Live) -> Json {
        let graph = &self.graph;
        let marking = &live.marking;
        let roles: Vec<&str> = graph.all_roles().into_iter().collect();
        let events: Vec<Json> = graph
            .events()
            .iter()
            .map(|e| {
                let mut enabled_for: Vec<&str> = roles
                    .iter()
                    .copied()
                    .filter(|r| is_enabled(graph, marking, &e.id, r).unwrap_or(false))
                    .collect();
                if is_enabled(graph, marking, &e.id, ANY_ROLE).unwrap_or(false) {
                    enabled_for.push(ANY_ROLE);
                }
                let kind = match &e.kind {
                    EventKind::Input => json!("input"),
                    EventKind::Computation(expr) => json!({ "compute": expr.to_string() }),
                    EventKind::Simple => json!("simple"),
                };
                json!({
                    "id": e.id,
                    "label": e.label.action,
                    "roles": e.label.roles,
                    "kind": kind,
                    "parent": e.parent,
                    "included": marking.is_included(&e.id),
                    "executed": marking.executed_age(&e.id),
                    "required": marking.deadline(&e.id).map(|d| match d {
                        Deadline::Finite(steps) => json!(steps),
                        Deadline::Infinity => json!("inf"),
                    }),
                    "value": marking.value(&e.id).map(Value::to_json),
                    "enabledFor": enabled_for,
                })
            })
            .collect();
        let created = self.created_at.duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        json!({
            "sessionId": self.id,
            "graph": graph.name(),
            "roles": roles,
            "createdAt": created,
            "now": live.now,
            "accepting": is_accepting(marking),
            "events": events,
            "history": live.history,
        })
    }

    pub fn enabled(&self, live: &Live, role: &str) -> Vec<String> {
        enabled_events(&self.graph, &live.marking, role)
            .into_iter()
            .map(|id| id.to_string())
            .collect()
    }

    /// Executions so far as a trace that the conformance checker accepts.
    pub fn trace(&self, live: &Live) -> String {
        let entries: Vec<TraceEntry> = live
            .history
            .iter()
            .filter_map(|h| match h {
                HistoryEntry::Execute { at, role, report, input, .. } => Some((at, role, report, input)),
                HistoryEntry::Advance { .. } => None,
            })
            .enumerate()
            .map(|(i, (at, role, report, input))| TraceEntry {
                seq: i as u64 + 1,
                at: *at,
                role: role.clone(),
                event: report.executed_event.clone(),
                value: input.clone(),
            })
            .collect();
        write_trace(&entries)
    }
}

/// In-memory sessions with idle eviction.
pub struct Store {
    sessions: Mutex<HashMap<String, Arc<Session>>>,
    ttl: Duration,
}

impl Store {
    pub fn new(ttl: Duration) -> Self {
        Store {
            sessions: Mutex::new(HashMap::new()),
            ttl,
        }
    }

    fn map(&self) -> MutexGuard<'_, HashMap<String, Arc<Session>>> {
        self.sessions.lock().unwrap_or_else(|e| e.into_inner())
    }

    pub fn create(&self, graph: Graph) -> Arc<Session> {
        self.evict_idle();
        let id = uuid::Uuid::new_v4().simple().to_string();
        let session = Arc::new(Session::new(id.clone(), graph));
        self.map().insert(id, session.clone());
        session
    }

    pub fn get(&self, id: &str) -> Option<Arc<Session>> {
        self.evict_idle();
        self.map().get(id).cloned()
    }

    pub fn len(&self) -> usize {
        self.map().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn evict_idle(&self) {
        let ttl = self.ttl;
        self.map().retain(|_, s| {
            // A session whose lock is held is in use right now.
            match s.live.try_lock() {
                Ok(live) => live.touched.elapsed() < ttl,
                Err(_) => true,
            }
        });
    }
}
