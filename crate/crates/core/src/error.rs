use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: header mismatch: expected [{expected}], found [{found}]")]
    Schema {
        path: PathBuf,
        expected: String,
        found: String,
    },

    /// One or more rows failed validation. Line numbers are 1-based and
    /// count the header as line 1.
    #[error("{path}: {}", format_line_errors(.errors))]
    Rows {
        path: PathBuf,
        errors: Vec<(u64, String)>,
    },

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("unknown variable(s): {}", .0.join(", "))]
    UnknownVariable(Vec<String>),

    #[error("perfect separation detected (max |index| = {max_index:.1}); culprit columns: {}", .columns.join(", "))]
    Separation { max_index: f64, columns: Vec<String> },

    #[error("no convergence after {iterations} iterations (gradient norm {gradient_norm:.3e})")]
    NonConvergence {
        iterations: usize,
        gradient_norm: f64,
    },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("kappa undefined: chance agreement equals one")]
    KappaUndefined,

    #[error("{0}")]
    Serialize(String),
}

fn format_line_errors(errors: &[(u64, String)]) -> String {
    const SHOWN: usize = 20;
    let mut out = errors
        .iter()
        .take(SHOWN)
        .map(|(line, msg)| format!("line {line}: {msg}"))
        .collect::<Vec<_>>()
        .join("; ");
    if errors.len() > SHOWN {
        out.push_str(&format!("; ... {} more", errors.len() - SHOWN));
    }
    out
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    /// True for estimation failures (separation, non-convergence, singular
    /// systems) as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Separation { .. }
                | Error::NonConvergence { .. }
                | Error::Numerical(_)
                | Error::KappaUndefined
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Serialize(e.to_string())
    }
}
