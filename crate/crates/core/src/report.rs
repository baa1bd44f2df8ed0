//! Check outcomes shared by the studies and the command-line reports.

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Pass,
    Fail,
    /// Not decidable at the current truncation or resolution.
    Inconclusive,
    /// A quantity grows without bound along the ladder.
    Divergent,
    /// A quantity stays bounded along the ladder.
    Bounded,
}

impl Status {
    pub fn from_bool(ok: bool) -> Self {
        if ok {
            Status::Pass
        } else {
            Status::Fail
        }
    }

    pub fn is_failure(self) -> bool {
        self == Status::Fail
    }
}

/// A named scalar comparison against a tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub status: Status,
    pub value: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    /// Passes when `value ≤ tolerance`; a NaN value fails.
    pub fn at_most(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            status: Status::from_bool(value <= tolerance),
            value,
            tolerance,
            detail: None,
        }
    }

    pub fn with_status(name: impl Into<String>, status: Status, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            status,
            value,
            tolerance,
            detail: None,
        }
    }

    pub fn detail(mut self, text: impl Into<String>) -> Self {
        self.detail = Some(text.into());
        self
    }
}

/// Relative difference `|a − b| / max(|b|, floor)`.
pub fn rel_diff(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / b.abs().max(floor)
}
