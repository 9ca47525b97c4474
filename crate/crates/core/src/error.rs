use thiserror::Error;

/// Errors raised by the bound computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Taylor approximation of the squint loss needs kappa <= 0.5, got {kappa:.4}")]
    TaylorOutOfRange { kappa: f64 },

    #[error("noise PSD bin {bin} is not positive ({value:e} W/Hz)")]
    NonPositivePsd { bin: usize, value: f64 },

    #[error("total distortion is zero, saturation capacity is unbounded")]
    ZeroDistortion,

    #[error("noise PSD convention mismatch: expected {expected}, got {found}")]
    ConventionMismatch { expected: &'static str, found: &'static str },

    #[error("Fisher information matrix is singular")]
    SingularFim,

    #[error("noise covariance is not positive definite (failed at order {order})")]
    CovarianceNotPD { order: usize },

    #[error("pilot overhead alpha = {alpha} is outside (0, 1]")]
    AlphaOutOfRange { alpha: f64 },

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("quadrature did not converge: estimate {estimate:e}, error {error:e}")]
    QuadratureFailed { estimate: f64, error: f64 },

    #[error("grid of {n} bins exceeds the dense-covariance limit of {max}")]
    GridTooLarge { n: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}
