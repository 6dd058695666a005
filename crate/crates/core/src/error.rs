use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: String, got: String },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid pilot pattern: {0}")]
    InvalidPattern(String),

    #[error("pilot count along time must be even for rotation, got {0}")]
    OddPilotCount(usize),

    #[error("channel is not underspread: tau_D * nu_D = {product} >= 1")]
    Overspread { product: f64 },

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("reference has zero energy")]
    ZeroReference,

    #[error("insufficient history: {0}")]
    InsufficientHistory(String),

    #[error("schema mismatch: expected {expected}, found {found}")]
    SchemaMismatch { expected: String, found: String },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dims(rows: usize, cols: usize) -> String {
    format!("{rows}x{cols}")
}
