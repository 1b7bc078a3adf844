use thiserror::Error;

/// Errors produced by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum FracError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// The leading coefficient `a + 1` of the recurrence vanishes.
    #[error("singular parameter: a = {a} makes the leading coefficient a + 1 vanish")]
    SingularParameter { a: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("index {index} out of range for sequence of length {len}")]
    Range { index: usize, len: usize },

    #[error("no root found: {0}")]
    NoRoot(String),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    /// The query point lies inside the marginal band around the boundary curve.
    #[error("point lies within {distance:e} of the boundary curve (band {band:e})")]
    MarginalProximity { distance: f64, band: f64 },
}

impl FracError {
    /// True for failures of an iterative numeric method, as opposed to bad input.
    pub fn is_numeric_failure(&self) -> bool {
        matches!(self, FracError::NoRoot(_) | FracError::NoConvergence { .. })
    }
}

pub type Result<T> = std::result::Result<T, FracError>;
