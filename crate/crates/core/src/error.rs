use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library reports.
#[derive(Debug, Error)]
pub enum Error {
    /// Shape mismatch: wrong row count, horizon mismatch, missing park, dimension mismatch.
    #[error("schema error: {0}")]
    Schema(String),

    #[error("parse error in {path}: line {line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("value out of range: {0}")]
    Range(String),

    #[error("cannot split scenarios: {0}")]
    Split(String),

    /// A quantity that would be divided by is zero or empty.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("policy error: {0}")]
    Policy(String),

    #[error("reports are not comparable: {0}")]
    Comparison(String),

    /// The LP did not reach an optimal solution.
    #[error("solver failed{}: {msg}", context.as_deref().map(|c| format!(" ({c})")).unwrap_or_default())]
    Solver {
        context: Option<String>,
        msg: String,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization error: {0}")]
    Serde(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Attach a context string (policy label, scenario label) to a solver failure.
    pub fn with_context(self, ctx: impl Into<String>) -> Self {
        match self {
            Error::Solver { context, msg } => {
                let ctx = ctx.into();
                let context = Some(match context {
                    Some(inner) => format!("{ctx}: {inner}"),
                    None => ctx,
                });
                Error::Solver { context, msg }
            }
            other => other,
        }
    }

    /// Process exit code used by the command-line front-end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Solver { .. } => 2,
            _ => 1,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
