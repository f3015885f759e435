use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("cohort filter left no rows")]
    EmptyCohort,

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("unknown node `{0}`")]
    UnknownNode(String),

    #[error("graph is not acyclic: {0}")]
    Cycle(String),

    #[error("fixture integrity check failed: {0}")]
    Fixture(String),

    #[error("path enumeration aborted after {cap} paths; use total_influence instead")]
    PathCap { cap: usize },

    #[error("power iteration did not converge after {0} iterations")]
    Convergence(usize),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn pre(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    /// True for failures that originate in the filesystem rather than in the
    /// content of the inputs.
    pub fn is_io(&self) -> bool {
        match self {
            Error::Io(_) => true,
            Error::Csv(e) => matches!(e.kind(), csv::ErrorKind::Io(_)),
            _ => false,
        }
    }
}
