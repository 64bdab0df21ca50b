use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::EventId;
use crate::duration::Deadline;
use crate::expr::Value;

/// Run state of a graph: execution ages, pending deadlines, the included
/// set and event values.
///
/// Ordered collections keep iteration and serialisation deterministic.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Marking {
    /// Steps since each event was last executed.
    pub executed: BTreeMap<EventId, u64>,
    /// Deadline of each event that is required to happen.
    pub required: BTreeMap<EventId, Deadline>,
    pub included: BTreeSet<EventId>,
    pub values: BTreeMap<EventId, Value>,
}

impl Marking {
    pub fn is_included(&self, id: &EventId) -> bool {
        self.included.contains(id)
    }

    pub fn is_required(&self, id: &EventId) -> bool {
        self.required.contains_key(id)
    }

    pub fn executed_age(&self, id: &EventId) -> Option<u64> {
        self.executed.get(id).copied()
    }

    pub fn deadline(&self, id: &EventId) -> Option<Deadline> {
        self.required.get(id).copied()
    }

    pub fn value(&self, id: &EventId) -> Option<&Value> {
        self.values.get(id)
    }

    /// Stores `value`, dropping the entry when it is `Undefined`.
    pub fn set_value(&mut self, id: &EventId, value: Value) {
        if value.is_defined() {
            self.values.insert(id.clone(), value);
        } else {
            self.values.remove(id);
        }
    }

    /// Events that are both included and required.
    pub fn pending(&self) -> impl Iterator<Item = (&EventId, Deadline)> {
        self.required
            .iter()
            .filter(|(id, _)| self.included.contains(*id))
            .map(|(id, d)| (id, *d))
    }

    /// Every event id mentioned anywhere in the marking.
    pub fn mentioned_ids(&self) -> BTreeSet<&EventId> {
        self.executed
            .keys()
            .chain(self.required.keys())
            .chain(self.included.iter())
            .chain(self.values.keys())
            .collect()
    }
}
