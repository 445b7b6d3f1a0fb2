use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("FCIDUMP parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("open-shell input: {n_alpha} alpha vs {n_beta} beta electrons")]
    OpenShell { n_alpha: usize, n_beta: usize },

    #[error("index {index} out of range for {limit} {what}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        limit: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Pauli string has no X/Y support")]
    NoXySupport,

    #[error("Pauli string has odd Y-count")]
    OddYCount,

    #[error("degenerate estimate: norm estimate {0} is not positive")]
    DegenerateEstimate(f64),

    #[error("non-finite gradient component at index {0}")]
    NonFiniteGradient(usize),

    #[error("system too large: {0} qubits exceeds the limit of {1}")]
    TooLarge(usize, usize),

    #[error("seed {seed}: {source}")]
    Seed {
        seed: u64,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
