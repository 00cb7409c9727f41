//! Crate-wide error type.

use thiserror::Error;

/// Errors surfaced by corpus ingestion, training, solving, and model I/O.
///
/// Contract violations (e.g. length mismatches between a sentence and its
/// label sequence) are caller bugs and panic instead of returning a variant.
#[derive(Debug, Error)]
pub enum Error {
    /// Malformed corpus or model text, with the 1-based offending line.
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// Invalid configuration (bad key, bad value, impossible split, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// A guarded operation refused an instance that is too large.
    #[error("instance too large: {0}")]
    Guard(String),

    /// A constrained update has no feasible point.
    #[error("infeasible constraint: {0}")]
    Infeasible(String),

    /// Model file failed its checksum on load.
    #[error("model checksum mismatch: stored {stored}, computed {computed}")]
    ChecksumMismatch { stored: String, computed: String },

    /// A γ-condition assertion failed while `check_conditions` was enabled.
    #[error("update condition violated: {0}")]
    ConditionViolated(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
