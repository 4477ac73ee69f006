use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QdynError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("q = {q} lies outside the tabulated range [{min}, {max}]")]
    OutOfRange { q: f64, min: f64, max: f64 },

    #[error("boundary leak: |psi| = {amplitude:.3e} at the grid edge exceeds {threshold:.3e}")]
    BoundaryLeak { amplitude: f64, threshold: f64 },

    #[error("insufficient coverage: {0}")]
    Coverage(String),

    #[error("degenerate tomographic frame (mu, nu) = (0, 0)")]
    DegenerateFrame,

    #[error("time step {dt:e} exceeds the Courant bound {max:e}")]
    CourantViolation { dt: f64, max: f64 },

    #[error("Chebyshev order exceeds the hard cap {cap}")]
    OrderCap { cap: usize },

    #[error("grid size {n} exceeds the configured cap {cap}")]
    SizeCap { n: usize, cap: usize },

    #[error("cannot sample from a field with negative value {value:e}")]
    NegativeDensity { value: f64 },

    #[error("numerical instability: {0}")]
    Instability(String),

    #[error("matrix is indefinite beyond tolerance: smallest eigenvalue {lambda_min:e}")]
    Indefinite { lambda_min: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("no samples supplied")]
    EmptySamples,

    #[error("non-finite value in {0}")]
    NonFinite(String),
}

impl QdynError {
    /// True for errors caused by a numerical breakdown during propagation
    /// rather than by invalid input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            QdynError::BoundaryLeak { .. }
                | QdynError::OrderCap { .. }
                | QdynError::Instability(_)
                | QdynError::Indefinite { .. }
                | QdynError::NonFinite(_)
        )
    }

    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        QdynError::InvalidParameter { name, reason: reason.into() }
    }
}

pub type Result<T> = std::result::Result<T, QdynError>;

/// Shorthand used by the sibling crates for parameter validation.
pub fn ensure(cond: bool, name: &'static str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(QdynError::param(name, reason))
    }
}
