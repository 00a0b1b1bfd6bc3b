use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },

    #[error("non-finite coefficient at degree {degree}")]
    NonFinite { degree: usize },

    #[error("series parity violated: degree {degree} has coefficient {value}")]
    Parity { degree: usize, value: f64 },

    #[error("inner series has nonzero constant term {0}")]
    NonzeroConstant(f64),

    #[error("series has zero linear coefficient; not invertible")]
    ZeroLinear,

    #[error("unknown elementary series `{0}`")]
    UnknownSeries(String),

    #[error("odd majority parameter k = {0}; k must be even")]
    OddMajority(usize),

    #[error("unsupported parameter: {0}")]
    Unsupported(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector norm {norm} deviates from 1 beyond tolerance")]
    NotUnit { norm: f64 },

    #[error("degenerate geometry: {0}")]
    Degenerate(String),

    #[error("coefficient sign check failed at degree {degree}: {value} ({claim})")]
    SignViolation {
        degree: usize,
        value: f64,
        claim: &'static str,
    },

    #[error("inverse-series bound violated at degree {degree}: {value} not in [{lower}, {upper}]")]
    InverseBound {
        degree: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },

    #[error("embedding too large: {dim} coordinates exceeds limit {limit}")]
    EmbeddingTooLarge { dim: usize, limit: usize },

    #[error("precision failure: {0}")]
    Precision(String),

    #[error("invalid {field}: {reason}")]
    InvalidInput { field: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
