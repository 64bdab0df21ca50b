//! Graph and marking data model.

mod graph;
mod ids;
mod marking;

pub use graph::{Event, EventDraft, EventKind, Graph, GraphBuilder, Relation, RelationKind};
pub use ids::{EventId, InvalidEventId, Label};
pub(crate) use ids::is_valid_ident;
pub use marking::Marking;
