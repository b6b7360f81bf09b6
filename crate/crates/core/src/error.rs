use thiserror::Error;

/// Errors produced while validating inputs or scoring posteriors.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A value violates a type invariant. `path` locates the offending field.
    #[error("invalid value at {path}: {message}")]
    Validation { path: String, message: String },

    #[error("dimension mismatch at {path}: expected {expected}, found {found}")]
    DimensionMismatch {
        path: String,
        expected: usize,
        found: usize,
    },

    /// No complete column assignment exists.
    #[error("assignment problem is infeasible")]
    Infeasible,

    #[error("{what} = {actual} exceeds the exhaustive-evaluation limit of {limit}")]
    SizeLimit {
        what: &'static str,
        actual: usize,
        limit: usize,
    },

    #[error("decomposition requires a single-hypothesis posterior, found {hypotheses} hypotheses")]
    NotPmb { hypotheses: usize },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("MOTA is undefined for an empty ground-truth set")]
    EmptyGroundTruth,

    /// Wraps another error with the name of the tracker being scored.
    #[error("tracker '{tracker}': {source}")]
    Tracker {
        tracker: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn validation(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            message: message.into(),
        }
    }

    /// Prefixes the path of validation-style errors with `prefix`.
    pub(crate) fn within(self, prefix: &str) -> Self {
        let join = |p: String| {
            if p.is_empty() {
                prefix.to_string()
            } else if p.starts_with('[') {
                format!("{prefix}{p}")
            } else {
                format!("{prefix}.{p}")
            }
        };
        match self {
            Error::Validation { path, message } => Error::Validation {
                path: join(path),
                message,
            },
            Error::DimensionMismatch {
                path,
                expected,
                found,
            } => Error::DimensionMismatch {
                path: join(path),
                expected,
                found,
            },
            other => other,
        }
    }

    /// Strips tracker context.
    pub fn root(&self) -> &Error {
        match self {
            Error::Tracker { source, .. } => source.root(),
            other => other,
        }
    }

    /// True for input-validation failures (as opposed to infeasibility or size limits).
    pub fn is_validation(&self) -> bool {
        matches!(
            self.root(),
            Error::Validation { .. }
                | Error::DimensionMismatch { .. }
                | Error::NotPmb { .. }
                | Error::Unsupported(_)
                | Error::EmptyGroundTruth
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
