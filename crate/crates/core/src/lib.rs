//! Execution engine for timed DCR graphs with data, sub-processes and roles.
//!
//! The crate is organised around an immutable [`Graph`] and a value-typed
//! [`Marking`]. Semantic operations live in [`engine`]; the authoring formats
//! live in [`dsl`], [`json`] and [`dot`].

pub mod conformance;
pub mod dot;
pub mod dsl;
pub mod duration;
pub mod engine;
pub mod expr;
pub mod json;
pub mod model;
pub mod patterns;
pub mod validate;

pub use duration::{format_duration, parse_duration, Deadline, Duration, MalformedDuration};
pub use engine::{
    advance_time, check_enabled, enabled_events, execute, is_accepting, is_enabled, Blocker,
    Clause, EffectReport, ExecError, TimeError,
};
pub use expr::{Expr, Value};
pub use model::{Event, EventId, EventKind, Graph, GraphBuilder, Label, Marking, Relation, RelationKind};
pub use validate::{validate, ValidationReport};
