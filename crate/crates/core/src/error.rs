use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cooperation radius is unbounded for gamma = 1 (homogeneous network)")]
    UnboundedRadius,

    #[error("ill-conditioned channel estimate: condition estimate {condition:.3e} exceeds {threshold:.3e}")]
    IllConditioned { condition: f64, threshold: f64 },

    #[error(
        "rejection rate exceeded at {snr_db} dB: {rejected} rejected vs {accepted} accepted \
         (limit {limit}, worst condition estimate {worst_condition:.3e})"
    )]
    RejectionRateExceeded {
        snr_db: f64,
        rejected: usize,
        accepted: usize,
        limit: f64,
        worst_condition: f64,
    },

    #[error("insufficient points: need {needed}, have {available}")]
    InsufficientPoints { needed: usize, available: usize },

    #[error("singular matrix")]
    Singular,

    #[error("Neumann series diverges: spectral radius {0:.4} >= 1")]
    DivergentSeries(f64),

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
