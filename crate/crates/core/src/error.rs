use std::path::PathBuf;

use crate::expr::ExprError;

/// Errors raised by the verification engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Shapes, valences or algebraic preconditions do not fit together.
    #[error("structural error: {0}")]
    Structural(String),

    /// A linear-algebra step failed (singular metric, failed decomposition).
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Random generation could not produce an acceptable sample.
    #[error("generation error: {0}")]
    Generation(String),

    /// Two independent routes to the same quantity disagree.
    #[error("internal consistency error: {check}: residual {residual:e} exceeds {tolerance:e}")]
    Consistency {
        check: String,
        residual: f64,
        tolerance: f64,
    },

    /// An operation was called outside its domain of validity.
    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
