//! Discrete time: step counts, deadlines and the ISO-8601 duration codec.
//!
//! One step is one second. Calendar units are fixed-length so that every
//! duration maps to an exact step count:
//!
//! | unit | steps      |
//! |------|------------|
//! | `Y`  | 31 536 000 |
//! | `M`  | 2 592 000  |
//! | `W`  | 604 800    |
//! | `D`  | 86 400     |
//! | `TH` | 3 600      |
//! | `TM` | 60         |
//! | `TS` | 1          |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub const SECOND: u64 = 1;
pub const MINUTE: u64 = 60;
pub const HOUR: u64 = 3_600;
pub const DAY: u64 = 86_400;
pub const WEEK: u64 = 7 * DAY;
pub const MONTH: u64 = 30 * DAY;
pub const YEAR: u64 = 365 * DAY;

/// A non-negative number of time steps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Duration(u64);

impl Duration {
    pub const ZERO: Duration = Duration(0);

    pub const fn from_steps(steps: u64) -> Self {
        Duration(steps)
    }

    pub const fn steps(self) -> u64 {
        self.0
    }

    pub fn checked_add(self, other: Duration) -> Option<Duration> {
        self.0.checked_add(other.0).map(Duration)
    }
}

impl fmt::Display for Duration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_duration(*self))
    }
}

impl FromStr for Duration {
    type Err = MalformedDuration;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_duration(s)
    }
}

impl Serialize for Duration {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_u64(self.0)
    }
}

impl<'de> Deserialize<'de> for Duration {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        u64::deserialize(deserializer).map(Duration)
    }
}

/// Deadline of a required event: a finite number of steps left, or none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Deadline {
    Finite(u64),
    #[default]
    Infinity,
}

impl Deadline {
    pub fn finite(self) -> Option<u64> {
        match self {
            Deadline::Finite(steps) => Some(steps),
            Deadline::Infinity => None,
        }
    }

    /// Deadline after `delta` steps have elapsed, floored at zero.
    pub fn elapse(self, delta: u64) -> Deadline {
        match self {
            Deadline::Finite(steps) => Deadline::Finite(steps.saturating_sub(delta)),
            Deadline::Infinity => Deadline::Infinity,
        }
    }
}

impl PartialOrd for Deadline {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Deadline {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        use std::cmp::Ordering;
        match (self, other) {
            (Deadline::Finite(a), Deadline::Finite(b)) => a.cmp(b),
            (Deadline::Finite(_), Deadline::Infinity) => Ordering::Less,
            (Deadline::Infinity, Deadline::Finite(_)) => Ordering::Greater,
            (Deadline::Infinity, Deadline::Infinity) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Deadline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Deadline::Finite(steps) => f.write_str(&format_duration(Duration(*steps))),
            Deadline::Infinity => f.write_str("inf"),
        }
    }
}

impl Serialize for Deadline {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Deadline::Finite(steps) => serializer.serialize_u64(*steps),
            Deadline::Infinity => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Deadline {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Steps(u64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Steps(steps) => Ok(Deadline::Finite(steps)),
            Raw::Text(text) if text == "inf" => Ok(Deadline::Infinity),
            Raw::Text(text) => Err(serde::de::Error::custom(format!(
                "deadline must be a step count or \"inf\", got {text:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("malformed duration {text:?}: {reason}")]
pub struct MalformedDuration {
    pub text: String,
    pub reason: &'static str,
}

/// Parses the subset `P[nY][nM][nW][nD][T[nH][nM][nS]]`.
pub fn parse_duration(text: &str) -> Result<Duration, MalformedDuration> {
    let fail = |reason| MalformedDuration {
        text: text.to_string(),
        reason,
    };
    let rest = text.strip_prefix('P').ok_or_else(|| fail("missing leading 'P'"))?;
    if rest.is_empty() {
        return Err(fail("no components"));
    }

    const DATE_UNITS: [(char, u64); 4] = [('Y', YEAR), ('M', MONTH), ('W', WEEK), ('D', DAY)];
    const TIME_UNITS: [(char, u64); 3] = [('H', HOUR), ('M', MINUTE), ('S', SECOND)];

    let (date, time) = match rest.split_once('T') {
        Some((date, time)) => {
            if time.is_empty() {
                return Err(fail("empty time part after 'T'"));
            }
            (date, Some(time))
        }
        None => (rest, None),
    };

    let mut total: u64 = 0;
    let mut accumulate = |part: &str, units: &[(char, u64)]| -> Result<(), MalformedDuration> {
        let mut next_unit = 0usize;
        let mut digits = String::new();
        for ch in part.chars() {
            if ch.is_ascii_digit() {
                digits.push(ch);
                continue;
            }
            let pos = units[next_unit..]
                .iter()
                .position(|(u, _)| *u == ch)
                .ok_or_else(|| fail("unexpected or out-of-order unit"))?;
            if digits.is_empty() {
                return Err(fail("unit without a number"));
            }
            let count: u64 = digits.parse().map_err(|_| fail("number too large"))?;
            let scale = units[next_unit + pos].1;
            total = count
                .checked_mul(scale)
                .and_then(|v| total.checked_add(v))
                .ok_or_else(|| fail("duration overflows"))?;
            next_unit += pos + 1;
            digits.clear();
        }
        if !digits.is_empty() {
            return Err(fail("trailing number without a unit"));
        }
        Ok(())
    };

    accumulate(date, &DATE_UNITS)?;
    if let Some(time) = time {
        accumulate(time, &TIME_UNITS)?;
    }
    Ok(Duration(total))
}

/// Formats a duration using the largest units that divide it exactly,
/// greedily from years down to seconds. Zero is `PT0S`.
pub fn format_duration(d: Duration) -> String {
    let mut rest = d.0;
    if rest == 0 {
        return "PT0S".to_string();
    }
    let mut out = String::from("P");
    for (unit, scale) in [('Y', YEAR), ('M', MONTH), ('W', WEEK), ('D', DAY)] {
        if rest >= scale {
            out.push_str(&format!("{}{}", rest / scale, unit));
            rest %= scale;
        }
    }
    if rest > 0 {
        out.push('T');
        for (unit, scale) in [('H', HOUR), ('M', MINUTE), ('S', SECOND)] {
            if rest >= scale {
                out.push_str(&format!("{}{}", rest / scale, unit));
                rest %= scale;
            }
        }
    }
    out
}
