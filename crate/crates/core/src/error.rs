use thiserror::Error;

/// Errors raised by the engine. Every variant maps to a stable machine-readable
/// code via [`Error::code`], which the command-line front end prints verbatim.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("dimension arithmetic overflowed while computing {0}")]
    Overflow(&'static str),

    #[error("matrix shape mismatch: expected {expected}, got {got}")]
    Shape { expected: String, got: String },

    #[error("jet coordinate {coordinate} lies outside the frame (n={n}, m={m}, q={q})")]
    CoordinateOutOfFrame {
        coordinate: String,
        n: usize,
        m: usize,
        q: usize,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is singular")]
    Singular,

    #[error("system is not formally integrable (first failure at order {order}); complete it first")]
    NotFormallyIntegrable { order: usize },

    #[error("system symbol is not involutive: {0}")]
    NotInvolutive(String),

    #[error("no delta-regular coordinates found within {retries} attempts")]
    Indeterminate { retries: usize },

    #[error("budget exhausted: {0}")]
    BudgetExhausted(String),

    #[error("computation cancelled")]
    Cancelled,

    #[error("internal consistency failure: {0}")]
    Inconsistent(String),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Overflow(_) => "E_OVERFLOW",
            Error::Shape { .. } => "E_SHAPE",
            Error::CoordinateOutOfFrame { .. } => "E_OUT_OF_FRAME",
            Error::InvalidArgument(_) => "E_INVALID_ARGUMENT",
            Error::Singular => "E_SINGULAR",
            Error::NotFormallyIntegrable { .. } => "E_NOT_FI",
            Error::NotInvolutive(_) => "E_NOT_INVOLUTIVE",
            Error::Indeterminate { .. } => "E_INDETERMINATE",
            Error::BudgetExhausted(_) => "E_BUDGET",
            Error::Cancelled => "E_CANCELLED",
            Error::Inconsistent(_) => "E_INCONSISTENT",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
