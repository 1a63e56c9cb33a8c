//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in segment `{segment}`: expected {expected} values, got {actual}")]
    ShapeMismatch {
        segment: String,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value encountered in {context}")]
    NonFinite { context: String },

    #[error("invalid config field `{field}`: {message}")]
    Config { field: String, message: String },

    #[error("parameter count {count} exceeds cap {cap}")]
    ParamCapExceeded { count: usize, cap: usize },

    #[error("probe vector has zero norm")]
    ZeroProbe,

    #[error("ritz set is empty")]
    EmptyRitzSet,

    #[error("positive density mass is zero; K_H05 undefined")]
    ZeroPositiveMass,

    #[error("checkpoint ids do not match: `{left}` vs `{right}`")]
    CheckpointMismatch { left: String, right: String },

    #[error("no candidate checkpoints after applying accuracy tie band")]
    EmptyCandidateSet,

    #[error("unknown segment `{0}` named in frozen-segment list")]
    UnknownSegment(String),

    #[error("training diverged at epoch {epoch}: {message}")]
    Diverged { epoch: usize, message: String },

    #[error("checkpoint file: {0}")]
    CheckpointFormat(String),

    #[error("schema version {found} is newer than supported major {supported}")]
    SchemaVersion { found: u32, supported: u32 },

    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("toml: {0}")]
    Toml(#[from] toml::de::Error),
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn config(field: &str, message: impl Into<String>) -> Self {
        Error::Config {
            field: field.to_string(),
            message: message.into(),
        }
    }

    pub fn non_finite(context: impl Into<String>) -> Self {
        Error::NonFinite {
            context: context.into(),
        }
    }
}
