use serde::Serialize;

use super::TraceEntry;
use crate::duration::{Deadline, Duration};
use crate::engine::{
    advance_time, check_enabled, execute, is_accepting, next_deadline, Blocker, Clause, ExecError, TimeError,
};
use crate::model::{EventId, EventKind, Graph, Marking};

/// Upper bound on agent firings at a single instant, guarding against
/// graphs whose agent events keep re-requiring each other.
const SETTLE_LIMIT: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Status {
    Conformant,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind")]
pub enum Reason {
    NotEnabled { clause: Clause },
    DeadlineMissed { event: EventId },
    MissingInput,
    UnknownEvent,
    RoleMismatch,
    UnexpectedInput,
    EvaluationError,
    TimeOverflow { event: EventId },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub seq: u64,
    pub reason: Reason,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct Verdict {
    pub status: Status,
    pub violation: Option<Violation>,
    pub final_accepting: bool,
}

impl Verdict {
    pub fn is_conformant(&self) -> bool {
        self.status == Status::Conformant
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("verdicts always encode")
    }
}

/// An automatic participant that executes the events of `role` the moment
/// their deadline runs out. Input events are never fired by agents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgentPolicy {
    pub role: String,
}

impl AgentPolicy {
    pub fn at_deadline(role: impl Into<String>) -> Self {
        AgentPolicy { role: role.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AgentFiring {
    pub at: u64,
    pub role: String,
    pub event: EventId,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayOutcome {
    pub verdict: Verdict,
    /// Marking when replay stopped: after the last entry, or just before the
    /// failing one.
    pub final_marking: Marking,
    pub firings: Vec<AgentFiring>,
    /// Time reached, in steps since the start of the trace.
    pub now: u64,
}

pub fn replay(graph: &Graph, trace: &[TraceEntry], agents: &[AgentPolicy]) -> Verdict {
    replay_detailed(graph, trace, agents).verdict
}

pub fn replay_detailed(graph: &Graph, trace: &[TraceEntry], agents: &[AgentPolicy]) -> ReplayOutcome {
    let mut run = Run {
        graph,
        agents,
        marking: graph.initial_marking().clone(),
        now: 0,
        firings: Vec::new(),
    };
    let violation = run.entries(trace);
    if violation.is_none() {
        run.settle();
    }
    let verdict = Verdict {
        status: if violation.is_some() {
            Status::Violation
        } else {
            Status::Conformant
        },
        violation,
        final_accepting: is_accepting(&run.marking),
    };
    ReplayOutcome {
        verdict,
        final_marking: run.marking,
        firings: run.firings,
        now: run.now,
    }
}

struct Run<'a> {
    graph: &'a Graph,
    agents: &'a [AgentPolicy],
    marking: Marking,
    now: u64,
    firings: Vec<AgentFiring>,
}

impl Run<'_> {
    fn entries(&mut self, trace: &[TraceEntry]) -> Option<Violation> {
        for entry in trace {
            if let Err(reason) = self.advance_to(entry.at.max(self.now)) {
                let message = match &reason {
                    Reason::DeadlineMissed { event } => {
                        format!("deadline of `{event}` passed before step {}", entry.at)
                    }
                    _ => format!("time cannot advance to step {}", entry.at),
                };
                return Some(Violation {
                    seq: entry.seq,
                    reason,
                    message,
                });
            }
            match execute(self.graph, &self.marking, &entry.event, &entry.role, entry.value.clone()) {
                Ok((next, _)) => self.marking = next,
                Err(err) => {
                    return Some(Violation {
                        seq: entry.seq,
                        reason: reason_for(&err),
                        message: err.to_string(),
                    })
                }
            }
        }
        None
    }

    fn advance_to(&mut self, target: u64) -> Result<(), Reason> {
        while self.now < target {
            let remaining = target - self.now;
            let step = match next_deadline(&self.marking) {
                Some((0, _)) => {
                    self.settle();
                    match next_deadline(&self.marking) {
                        Some((0, event)) => {
                            return Err(Reason::DeadlineMissed {
                                event: event.clone(),
                            })
                        }
                        _ => continue,
                    }
                }
                Some((deadline, _)) => deadline.min(remaining),
                None => remaining,
            };
            self.marking = advance_time(&self.marking, Duration::from_steps(step)).map_err(|err| match err {
                TimeError::DeadlineViolation(v) => Reason::DeadlineMissed {
                    event: v[0].0.clone(),
                },
                TimeError::Overflow(event) => Reason::TimeOverflow { event },
            })?;
            self.now += step;
        }
        Ok(())
    }

    /// Lets agents fire every due event they cover, in event-id order, until
    /// nothing more is due or nobody can act.
    fn settle(&mut self) {
        if self.agents.is_empty() {
            return;
        }
        for _ in 0..SETTLE_LIMIT {
            let due: Vec<EventId> = self
                .marking
                .pending()
                .filter(|(_, d)| *d == Deadline::Finite(0))
                .map(|(id, _)| id.clone())
                .collect();
            let fired = due.iter().find_map(|id| self.fire(id));
            match fired {
                Some(firing) => self.firings.push(firing),
                None => return,
            }
        }
    }

    fn fire(&mut self, id: &EventId) -> Option<AgentFiring> {
        let event = self.graph.event(id)?;
        if event.kind == EventKind::Input {
            return None;
        }
        for agent in self.agents {
            if check_enabled(self.graph, &self.marking, id, &agent.role).is_err() {
                continue;
            }
            if let Ok((next, _)) = execute(self.graph, &self.marking, id, &agent.role, None) {
                self.marking = next;
                return Some(AgentFiring {
                    at: self.now,
                    role: agent.role.clone(),
                    event: id.clone(),
                });
            }
        }
        None
    }
}

fn reason_for(err: &ExecError) -> Reason {
    match err {
        ExecError::UnknownEvent(_) => Reason::UnknownEvent,
        ExecError::NotEnabled {
            blocker: Blocker::Role { .. },
            ..
        } => Reason::RoleMismatch,
        ExecError::NotEnabled { blocker, .. } => Reason::NotEnabled {
            clause: blocker.clause(),
        },
        ExecError::MissingInput(_) => Reason::MissingInput,
        ExecError::UnexpectedInput(_) => Reason::UnexpectedInput,
        ExecError::Evaluation { .. } => Reason::EvaluationError,
    }
}
