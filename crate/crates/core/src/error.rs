use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Interaction structure cannot be built with the requested shape.
    #[error("structural configuration error: {0}")]
    Structure(String),

    #[error("configuration error: {0}")]
    Config(String),

    /// Several configuration problems found at once.
    #[error("invalid scenario:\n  - {}", .0.join("\n  - "))]
    Invalid(Vec<String>),

    #[error("exhaustive enumeration refused: n = {n} exceeds the limit of {limit}")]
    TooLarge { n: usize, limit: usize },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invariant violated (replication {replication}, period {period}{}): {detail}",
        .agent.map(|a| format!(", agent {a}")).unwrap_or_default())]
    Invariant {
        replication: u64,
        period: u32,
        agent: Option<usize>,
        detail: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by user input rather than a broken run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Structure(_)
                | Error::Config(_)
                | Error::Invalid(_)
                | Error::TooLarge { .. }
                | Error::Parse { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Broken model invariant detected inside a replication step. The
/// simulation attaches the replication and period before reporting it.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{detail}")]
pub struct InvariantViolation {
    pub agent: Option<usize>,
    pub detail: String,
}

impl InvariantViolation {
    pub fn new(detail: String) -> Self {
        InvariantViolation { agent: None, detail }
    }

    pub fn agent(agent: usize, detail: String) -> Self {
        InvariantViolation {
            agent: Some(agent),
            detail,
        }
    }

    pub(crate) fn at(self, replication: u64, period: u32) -> Error {
        Error::Invariant {
            replication,
            period,
            agent: self.agent,
            detail: self.detail,
        }
    }
}
