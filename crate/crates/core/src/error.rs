use thiserror::Error;

/// Errors raised anywhere in the crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("size error: {0}")]
    Size(String),
    #[error("order error: {0}")]
    Order(String),
    #[error("index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("chi mismatch: {0}")]
    ChiMismatch(String),
    #[error("insufficient pure data for word `{word}`")]
    InsufficientData { word: String },
    #[error("moment table for pair `{pair}` is missing word `{word}`")]
    IncompleteTable { pair: String, word: String },
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown pair `{0}`")]
    UnknownPair(String),
    #[error("mode error: {0}")]
    Mode(String),
    #[error("degenerate centring on interval {0}")]
    DegenerateCentring(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid distribution spec: {0}")]
    Spec(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
