use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("sink: vertex {0} emits no edge")]
    Sink(String),

    #[error("negative multiplicity {count} on edge {src} -> {dst}")]
    NegativeMultiplicity { src: String, dst: String, count: i64 },

    #[error("unknown vertex {0}")]
    UnknownVertex(String),

    #[error("unknown edge {0}")]
    UnknownEdge(String),

    #[error("duplicate identifier {0}")]
    Duplicate(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("path is not composable at edge position {0}")]
    NotComposable(usize),

    #[error("missing value for vertex {0}")]
    MissingValue(String),

    #[error("no loops: the non-wandering part is empty")]
    NoLoops,

    #[error("graph is not strongly connected")]
    NotStronglyConnected,

    #[error("vertex potential has mixed signs; beta search needs a sign-definite potential")]
    MixedSignPotential,

    #[error("infeasible beta {beta}: {reason}")]
    Infeasible { beta: f64, reason: String },

    #[error("did not converge: {0}")]
    NonConvergence(String),

    #[error("frontier reached at vertex {0}")]
    FrontierReached(String),

    #[error("undetermined: {0}")]
    Undetermined(String),

    #[error("cofinality is neither established nor declared")]
    CofinalityUnknown,

    #[error("zero eigenvector entry at emitting vertex {0}")]
    ZeroEntry(String),

    #[error("golden mismatch: {0}")]
    GoldenMismatch(String),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Validation,
    Computation,
    Golden,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse(_)
            | Error::Sink(_)
            | Error::NegativeMultiplicity { .. }
            | Error::UnknownVertex(_)
            | Error::UnknownEdge(_)
            | Error::Duplicate(_)
            | Error::InvalidArgument(_)
            | Error::NotComposable(_)
            | Error::MissingValue(_)
            | Error::CofinalityUnknown => ErrorClass::Validation,
            Error::GoldenMismatch(_) => ErrorClass::Golden,
            _ => ErrorClass::Computation,
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
