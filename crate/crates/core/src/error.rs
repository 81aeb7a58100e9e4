use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("quantale instance mismatch: {left} vs {right}")]
    InstanceMismatch { left: String, right: String },

    #[error("value {value} is not an element of {instance}")]
    InvalidElement { instance: String, value: String },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("duplicate label `{0}`")]
    DuplicateLabel(String),

    #[error("unknown label `{0}`")]
    UnknownLabel(String),

    #[error("boundary mismatch: left boundary {left:?}, right boundary {right:?}")]
    BoundaryMismatch { left: Vec<String>, right: Vec<String> },

    #[error("no convergence after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("open network is not functional: {0}")]
    NotFunctional(String),

    #[error("unknown transition `{0}`")]
    UnknownTransition(String),

    #[error("unsupported translation from {from} to {to}")]
    UnsupportedTranslation { from: String, to: String },

    #[error("resource kind mismatch: {left} vs {right}")]
    KindMismatch { left: String, right: String },

    #[error("invalid marking: {0}")]
    InvalidMarking(String),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{0}")]
    Format(String),
}

impl Error {
    pub(crate) fn parse_at(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }

    /// Parse failures and format violations, as opposed to semantic errors.
    pub fn is_parse(&self) -> bool {
        matches!(self, Error::Parse { .. } | Error::Format(_))
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::parse_at(e.line(), e.column(), e.to_string())
    }
}
