use thiserror::Error;

/// Every failure the toolkit can report.
///
/// Variants are grouped by [`ErrorKind`] so front ends can map them onto
/// stable exit statuses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },

    #[error("type error at {path}: {msg}")]
    Type { path: String, msg: String },

    #[error("unsupported construct `{construct}` at {path}")]
    Unsupported { construct: &'static str, path: String },

    #[error("unbound template variable `{0}`")]
    UnboundTemplateVar(String),

    #[error("unbound variable `{0}`")]
    UnboundVar(String),

    #[error("missing observable {label} at day {day}")]
    MissingObservable { label: String, day: i64 },

    #[error("observable {label} at day {day} is not a real number")]
    NonRealObservable { label: String, day: i64 },

    #[error("no discount factor for day {0}")]
    MissingDiscount(i64),

    #[error("division by zero")]
    DivisionByZero,

    #[error("ill-typed evaluation: {0}")]
    ValueType(String),

    #[error("expression evaluated to a non-real value")]
    NonRealResult,

    #[error("contract is not template-closed")]
    NotTemplateClosed,

    #[error("negative time {0} where a natural number is required")]
    NegativeTime(i64),

    #[error("kernel index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("kernel input shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("dynamic row outside the materialized window: {0}")]
    UnsupportedDynamicRow(String),

    #[error("correlation matrix is not positive semidefinite")]
    CholeskyFailure,

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("non-finite payoff on path {0}")]
    NonfiniteAccumulation(u64),

    #[error("{0}")]
    Domain(String),

    #[error("json: {0}")]
    Json(String),
}

/// Coarse classification used for exit statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Parse,
    Type,
    Unsupported,
    Eval,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Parse { .. } | Error::Json(_) => ErrorKind::Parse,
            Error::Type { .. } => ErrorKind::Type,
            Error::Unsupported { .. } => ErrorKind::Unsupported,
            _ => ErrorKind::Eval,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
