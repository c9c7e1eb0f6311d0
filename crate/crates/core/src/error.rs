use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("unsupported field modulus {0} (expected 2, 3 or 5)")]
    UnsupportedField(u8),

    #[error("dimension mismatch: {what} (expected {expected}, got {got})")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("symbol {symbol} outside alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("invalid distribution: {0}")]
    InvalidPmf(String),

    #[error("enumeration budget exceeded: {needed} candidates > {budget}")]
    Budget { needed: f64, budget: f64 },

    #[error("slack precondition violated: {0}")]
    SlackRange(String),

    #[error("coset is empty for the requested syndrome")]
    EmptyCoset,

    #[error("every candidate coset tuple is empty (unreachable syndrome for sender {0})")]
    AllCosetsEmpty(usize),

    #[error("infeasible rates: {0}")]
    Infeasible(String),

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("config error at `{field}`: {msg}")]
    Config { field: String, msg: String },

    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
