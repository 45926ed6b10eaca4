use thiserror::Error;

/// Errors raised by the group, metric, transform and flow routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square or has odd dimension ({rows}x{cols})")]
    BadShape { rows: usize, cols: usize },

    #[error("matrix is not symplectic (residual {residual:e})")]
    SymplecticViolation { residual: f64 },

    #[error("conjugation leaves the Heisenberg group (residual {residual:e})")]
    NotAnAutomorphism { residual: f64 },

    #[error("matrix does not decompose into the expected pattern (residual {residual:e})")]
    Decomposition { residual: f64 },

    #[error("state is not timelike (1 - v^2/c^2 - f^2/b^2 + r^2/(c^2 b^2) = {denominator})")]
    NotTimelike { denominator: f64 },

    #[error("no real null velocity: radicand {radicand} is negative")]
    NoNullVelocity { radicand: f64 },

    #[error("speed {speed} is not below the speed scale {c}")]
    Superluminal { speed: f64, c: f64 },

    #[error("matrix does not preserve the metric (residual {residual:e})")]
    MetricViolation { residual: f64 },

    #[error("matrix is not a proper rotation (residual {residual:e})")]
    NotARotation { residual: f64 },

    #[error("matrix is singular")]
    Singular,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integration failed at t = {t}: non-finite value encountered")]
    IntegrationFailure { t: f64, last_good: Vec<f64> },

    #[error("invalid polynomial Hamiltonian: {0}")]
    Polynomial(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and positive, got {value}"),
        })
    }
}

pub(crate) fn same_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
