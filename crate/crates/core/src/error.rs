use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("Hurst parameter must lie in the open interval (0, 1), got {0}")]
    InvalidHurst(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("noise path grid (T={noise_t_end}, n={noise_steps}) does not match the simulation grid (T={t_end}, n={n_steps})")]
    GridMismatch { t_end: f64, n_steps: usize, noise_t_end: f64, noise_steps: usize },

    #[error("fBm increment covariance is not numerically positive definite for a grid of {n_steps} steps")]
    NotPositiveDefinite { n_steps: usize },

    #[error("circulant embedding for {n_steps} steps has eigenvalue {value:e} (largest {largest:e}); use the reference backend instead")]
    NegativeEigenvalue { n_steps: usize, value: f64, largest: f64 },

    #[error("reference fBm backend is limited to {max} steps, got {n_steps}")]
    ReferenceTooLarge { n_steps: usize, max: usize },
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
