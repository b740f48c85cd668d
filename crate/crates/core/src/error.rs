use thiserror::Error;

/// Errors produced by the simulation and analysis routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("instance too large: expected {expected:.3e} points exceeds cap {cap:.3e}")]
    InstanceTooLarge { expected: f64, cap: f64 },

    #[error("window too small: {0}")]
    WindowTooSmall(String),

    #[error("graph was sampled with pair scope {have}, which does not cover {need}")]
    ScopeMismatch { have: String, need: String },

    #[error("start vertex {0} lies outside the exploration domain")]
    StartOutsideDomain(usize),

    #[error("graph has no palm vertex")]
    MissingPalm,

    #[error("insufficient positive estimates: {have} rows with p_hat > 0, need {need}")]
    InsufficientPositive { have: usize, need: usize },

    #[error("insufficient scale coverage: {0}")]
    InsufficientCoverage(String),

    #[error("too censored: fraction {fraction:.4} exceeds cap {cap:.4}")]
    TooCensored { fraction: f64, cap: f64 },

    #[error("no tail: {0}")]
    NoTail(String),

    #[error("no closed form: {0}")]
    NoClosedForm(String),

    #[error("quadrature did not converge: value {value:e}, estimated error {error:e}")]
    Quadrature { value: f64, error: f64 },

    #[error("integral vanishes at n = {0}; slope undefined")]
    VanishingIntegral(f64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
