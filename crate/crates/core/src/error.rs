use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("precondition of action `{action}` does not hold")]
    PreconditionViolated { action: String },

    #[error("{line}:{col}: syntax error: {msg}")]
    Syntax { line: usize, col: usize, msg: String },

    #[error("unsupported requirement `{0}` (only :strips and :typing are accepted)")]
    UnsupportedRequirement(String),

    #[error("{line}:{col}: undeclared symbol `{symbol}`")]
    UndeclaredSymbol {
        line: usize,
        col: usize,
        symbol: String,
    },

    #[error("goal is empty")]
    EmptyGoal,

    #[error("grounding produced {count} {what}, cap is {cap}")]
    GroundingSize {
        what: &'static str,
        count: usize,
        cap: usize,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("unsupported format version {found} (expected {expected})")]
    FormatVersion { found: u64, expected: u64 },

    #[error("referential integrity: {0}")]
    Integrity(String),

    #[error("checksum mismatch or truncated file")]
    Checksum,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("no candidate actions to choose from")]
    EmptyCandidates,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{0} split is empty")]
    EmptySplit(&'static str),

    #[error("training diverged: non-finite loss at epoch {epoch}")]
    NonFinite { epoch: usize },

    #[error("forward state space exceeds cap of {0} states")]
    StateSpaceCap(usize),

    #[error("no results to summarize")]
    EmptyResults,
}
