use thiserror::Error;

/// Errors surfaced by every module in this crate.
#[derive(Debug, Error)]
pub enum MendrError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("matrix is not positive definite (min eigenvalue {min_eig})")]
    NotPositiveDefinite { min_eig: f64 },

    #[error("shape mismatch: {0}")]
    ShapeError(String),

    #[error("eigensolver failed to converge after {sweeps} sweeps (off-diagonal norm {off})")]
    ConvergenceFailed { sweeps: usize, off: f64 },

    #[error("degenerate retraction step: {0}")]
    DegenerateStep(String),

    #[error("incomplete decomposition: missing band {0}")]
    IncompleteDecomposition(String),

    #[error("insufficient negatives: need {needed} candidate patches, batch has {available}")]
    InsufficientNegatives { needed: usize, available: usize },

    #[error("stage order violation: {0}")]
    StageOrderError(String),

    #[error("config error: {0}")]
    ConfigError(String),

    #[error("corrupt dataset: {0}")]
    CorruptDataset(String),

    #[error("recording skipped: {0}")]
    SkippedRecording(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, MendrError>;
