use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown operation symbol `{0}`")]
    UnknownSymbol(String),

    #[error("operation `{symbol}` has arity {expected}, applied to {found} arguments")]
    ArityMismatch {
        symbol: String,
        expected: usize,
        found: usize,
    },

    #[error("variable x{index} is not covered by an environment of length {len}")]
    VariableOutOfRange { index: usize, len: usize },

    #[error("element {element} is outside the universe 0..{size}")]
    ElementOutOfRange { element: usize, size: usize },

    #[error("invalid algebra: {0}")]
    InvalidAlgebra(String),

    #[error("size bound exceeded: {what} needs {needed}, bound is {bound}")]
    SizeBoundExceeded {
        what: String,
        needed: u128,
        bound: u128,
    },

    #[error("not a partition of 0..{size}: {reason}")]
    BadPartition { size: usize, reason: String },

    #[error("not a congruence: {0}")]
    NotACongruence(String),

    #[error("malformed tree: {0}")]
    MalformedTree(String),

    #[error("term family has no terms for vertex {0}")]
    MissingVertexTerms(usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn bound(what: impl Into<String>, needed: u128, bound: u128) -> Self {
        Error::SizeBoundExceeded {
            what: what.into(),
            needed,
            bound,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
