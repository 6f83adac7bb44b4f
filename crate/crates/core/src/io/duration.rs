//! `M:S:MS` duration text, e.g. `0:18:225` or `0:15:3` (15.003 s).
//!
//! Fields are unpadded decimal integers; the last one counts whole
//! milliseconds, not a decimal fraction.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct DurationMs(pub u64);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DurationError {
    #[error("`{0}` is not M:S:MS")]
    Malformed(String),
    #[error("`{text}`: {field} out of range")]
    OutOfRange { text: String, field: &'static str },
}

fn field(text: &str, part: &str) -> Result<u64, DurationError> {
    let canonical = !part.is_empty()
        && part.bytes().all(|b| b.is_ascii_digit())
        && (part == "0" || !part.starts_with('0'));
    if !canonical {
        return Err(DurationError::Malformed(text.to_string()));
    }
    part.parse().map_err(|_| DurationError::Malformed(text.to_string()))
}

pub fn parse_duration(text: &str) -> Result<DurationMs, DurationError> {
    let parts: Vec<&str> = text.split(':').collect();
    let [m, s, ms] = parts[..] else {
        return Err(DurationError::Malformed(text.to_string()));
    };
    let (m, s, ms) = (field(text, m)?, field(text, s)?, field(text, ms)?);
    if s > 59 {
        return Err(DurationError::OutOfRange {
            text: text.to_string(),
            field: "seconds",
        });
    }
    if ms > 999 {
        return Err(DurationError::OutOfRange {
            text: text.to_string(),
            field: "milliseconds",
        });
    }
    m.checked_mul(60)
        .and_then(|v| v.checked_add(s))
        .and_then(|v| v.checked_mul(1000))
        .and_then(|v| v.checked_add(ms))
        .map(DurationMs)
        .ok_or(DurationError::OutOfRange {
            text: text.to_string(),
            field: "minutes",
        })
}

pub fn format_duration(d: DurationMs) -> String {
    d.to_string()
}

impl fmt::Display for DurationMs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ms = self.0 % 1000;
        let secs = self.0 / 1000;
        write!(f, "{}:{}:{}", secs / 60, secs % 60, ms)
    }
}

impl FromStr for DurationMs {
    type Err = DurationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_duration(s)
    }
}

/// Seconds with three decimals, truncated to whole milliseconds.
pub fn format_seconds(seconds: f64) -> String {
    let ms = (seconds * 1000.0 + 1e-6).floor().max(0.0) as u64;
    format!("{}.{:03}", ms / 1000, ms % 1000)
}
