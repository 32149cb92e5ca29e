//! Crate-wide error type.

/// Errors produced by the library.
///
/// Magnitudes carried by the variants are converted to `f64` so that the
/// error type stays independent of the working scalar type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    /// Inversion of a multiplier was requested on data with content on a
    /// kernel mode.
    #[error("range violation: kernel mode {mode} carries {magnitude:e}, tolerance {tolerance:e}")]
    RangeViolation {
        mode: i64,
        magnitude: f64,
        tolerance: f64,
    },

    #[error("not a diffeomorphism: min phi_x = {min_slope:e} on the refined grid")]
    NotADiffeomorphism { min_slope: f64 },

    /// Anti-aliasing budget of a multilinear application exceeded.
    #[error("resolution error: {0}")]
    Resolution(String),

    /// The symbol-condition checker only covers multipliers of order >= 1.
    #[error("unsupported order {order}: the symbol condition checker requires order >= 1")]
    UnsupportedOrder { order: f64 },

    #[error("degenerate constraint points: {0}")]
    DegeneratePoints(String),

    /// A flow left the chart (lost monotonicity or became non-finite)
    /// before the requested time.
    #[error("flow left the chart at t = {attained:e} before reaching the requested time")]
    OutsideDomain { attained: f64 },

    /// Shooting did not converge; the target may lie outside the normal
    /// neighbourhood. A signal rather than a hard failure.
    #[error("no convergence in {iterations} iterations (residual {residual:e}); target may be outside the normal neighbourhood")]
    OutsideNormalNeighborhood { iterations: usize, residual: f64 },

    #[error("constraint drift {drift:e} could not be restored below {tolerance:e}")]
    ConstraintDrift { drift: f64, tolerance: f64 },

    #[error("validation error: {0}")]
    Validation(String),
}

pub type Result<T> = std::result::Result<T, Error>;
