use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the scheduling library and the experiment harness.
#[derive(Debug, Error)]
pub enum SchedError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("slot {slot} is already assigned to grid {grid}")]
    SlotAssigned { slot: usize, grid: usize },

    #[error("slot {slot} out of range (schedule has {count} slots)")]
    SlotOutOfRange { slot: usize, count: usize },

    #[error("oracle instance too large: {what} = {size} exceeds the limit of {limit}")]
    InstanceTooLarge {
        what: &'static str,
        size: f64,
        limit: f64,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, SchedError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> SchedError {
    SchedError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
