//! Replaying recorded action logs against a graph.

mod replay;
mod trace;

pub use replay::{
    replay, replay_detailed, AgentFiring, AgentPolicy, Reason, ReplayOutcome, Status, Verdict, Violation,
};
pub use trace::{load_trace, write_trace, TraceEntry, TraceError};
