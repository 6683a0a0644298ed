use thiserror::Error;

/// Errors produced by the spectral pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid conductivity profile: {0}")]
    InvalidProfile(String),

    #[error("series order {order} is insufficient: tail bound {tail:.3e} exceeds {limit:.1e}")]
    InsufficientOrder { order: usize, tail: f64, limit: f64 },

    #[error("tables were built from mismatched profiles: {0}")]
    MismatchedProfiles(String),

    #[error("index {index} out of range (len {len})")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("lambda = {lambda} lies within {radius:.1e} of the eigenvalue {nearest}")]
    PoleProximity {
        lambda: num_complex::Complex64,
        nearest: f64,
        radius: f64,
    },

    #[error("mu = 0 is always a Neumann eigenvalue")]
    PoleAtZero,
}

pub type Result<T> = std::result::Result<T, Error>;
