use thiserror::Error;

/// Crate-wide error type.
///
/// Contract violations on hot paths (shape mismatches, out-of-range minor
/// sizes passed to internal kernels) panic via `assert!` instead; `Error` is
/// reserved for conditions a caller can reasonably hit with valid code:
/// empty inputs, unreachable training criteria, missing files, bad configs.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("training diverged: {0}")]
    Diverged(String),

    #[error("criterion never reached: {0}")]
    CriterionUnreached(String),

    #[error("missing prerequisite: {0}")]
    MissingPrerequisite(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("no runs found in {0}")]
    NoRuns(String),

    #[error("malformed file {path}: {detail}")]
    Malformed { path: String, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
