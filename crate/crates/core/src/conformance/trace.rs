use serde::{Deserialize, Serialize};

use crate::duration::parse_duration;
use crate::expr::Value;
use crate::model::EventId;

/// One observed action. `at` is in steps since the start of the trace.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceEntry {
    pub seq: u64,
    pub at: u64,
    pub role: String,
    pub event: EventId,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TraceError {
    #[error("line {line}: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("entry {seq} goes back in time")]
    NonMonotonicTime { seq: u64 },
    #[error("entry {seq} does not follow entry {previous}")]
    NonIncreasingSeq { seq: u64, previous: u64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    seq: u64,
    at: RawTime,
    role: String,
    event: EventId,
    #[serde(default)]
    value: Option<Value>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawTime {
    Steps(u64),
    Iso(String),
}

/// Parses JSON Lines, one entry per non-blank line.
pub fn load_trace(text: &str) -> Result<Vec<TraceEntry>, TraceError> {
    let mut entries: Vec<TraceEntry> = Vec::new();
    for (index, line) in text.lines().enumerate() {
        let line_no = index + 1;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| TraceError::MalformedLine {
            line: line_no,
            message,
        };
        let raw: RawEntry = serde_json::from_str(line).map_err(|e| malformed(e.to_string()))?;
        let at = match raw.at {
            RawTime::Steps(steps) => steps,
            RawTime::Iso(text) => parse_duration(&text).map_err(|e| malformed(e.to_string()))?.steps(),
        };
        if raw.seq == 0 {
            return Err(malformed("seq starts at 1".into()));
        }
        if raw.role.is_empty() {
            return Err(malformed("role must not be empty".into()));
        }
        if let Some(prev) = entries.last() {
            if raw.seq <= prev.seq {
                return Err(TraceError::NonIncreasingSeq {
                    seq: raw.seq,
                    previous: prev.seq,
                });
            }
            if at < prev.at {
                return Err(TraceError::NonMonotonicTime { seq: raw.seq });
            }
        }
        entries.push(TraceEntry {
            seq: raw.seq,
            at,
            role: raw.role,
            event: raw.event,
            value: raw.value.filter(Value::is_defined),
        });
    }
    Ok(entries)
}

/// Inverse of [`load_trace`] with integer timestamps.
pub fn write_trace(entries: &[TraceEntry]) -> String {
    let mut out = String::new();
    for entry in entries {
        out.push_str(&serde_json::to_string(entry).expect("trace entries always encode"));
        out.push('\n');
    }
    out
}
