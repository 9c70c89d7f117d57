use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A parameter is outside its mathematical domain.
    #[error("parameter out of domain: {0}")]
    Domain(String),

    /// Two inputs that must agree in length or shape do not.
    #[error("shape mismatch: {0}")]
    Shape(String),

    /// The corpus-size function left the 64-bit unsigned range.
    #[error("corpus size overflows u64 at t={t} (alpha={alpha}, beta={beta})")]
    CorpusOverflow { t: usize, alpha: f64, beta: u64 },

    /// A draw cannot reserve one token per word.
    #[error("cannot reserve one token per word: corpus size {tokens} < vocabulary size {vocab}")]
    Infeasible { tokens: u64, vocab: usize },

    /// A time series is too short for the requested computation.
    #[error("series too short: {0}")]
    TooShort(String),

    /// A least-squares design matrix is singular.
    #[error("singular design: {0}")]
    SingularDesign(String),

    /// Too few usable points remain after truncation or filtering.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A power-law fit over an all-zero turnover series is undefined.
    #[error("turnover fit undefined: every z(y) in the fit grid is zero")]
    TurnoverFitUndefined,

    /// A rank column failed its permutation integrity check.
    #[error("rank integrity: {0}")]
    Integrity(String),

    /// A configuration input (word list file, lexicon file) is unusable.
    #[error("configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
