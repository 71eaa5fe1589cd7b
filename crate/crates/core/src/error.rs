use thiserror::Error;

/// Errors raised by kernel evaluation, layer potentials and the decay tooling.
#[derive(Debug, Error)]
pub enum OseenError {
    #[error("kernel evaluated at its singularity (|x| = {0:e})")]
    Singularity(f64),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("mode k = 0 is not part of the purely periodic kernel")]
    ExcludedMode,
    #[error("evaluation point too close to the surface: distance {dist:.3e} < required {required:.3e}")]
    Proximity { dist: f64, required: f64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("missing data: {0}")]
    MissingData(String),
    #[error("fit error: {0}")]
    Fit(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, OseenError>;
