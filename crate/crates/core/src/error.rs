//! Error types shared across the crate.

use thiserror::Error;

/// Errors produced by grid construction, solvers, and estimate checks.
#[derive(Debug, Clone, Error)]
pub enum PmeError {
    /// A parameter left its admissible range (exponent windows, negative
    /// curvature scale, radicand of a bound function, ...).
    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    /// A configuration field is inconsistent (non-positive step, empty grid,
    /// boundary value incompatible with the scheme, ...).
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The spatial grid has too few cells for the requested stencil.
    #[error("grid too coarse: {cells} cells, need at least {min}")]
    GridTooCoarse { cells: usize, min: usize },

    /// A field that must be strictly positive contained a value <= 0.
    #[error("non-positive input: min value {min:.6e} at index {index}")]
    NonPositiveInput { min: f64, index: usize },

    /// The time step produced a non-positive iterate that damping could not
    /// rescue; the solution left the positivity cone at time `t`.
    #[error("positivity loss at t = {t:.6e}")]
    PositivityLoss { t: f64 },

    /// Newton failed to reach the residual tolerance within the iteration cap.
    #[error("Newton divergence at t = {t:.6e}: residual {residual:.3e} after {iters} iterations")]
    NewtonDivergence { t: f64, residual: f64, iters: usize },

    /// A snapshot index fell outside the range a time stencil needs.
    #[error("snapshot index {index} out of range for stencil (valid {lo}..={hi})")]
    IndexOutOfRange { index: usize, lo: usize, hi: usize },

    /// A check that only makes sense on flat space was asked to run on a
    /// curved model.
    #[error("check requires the Euclidean model: {0}")]
    ModelNotFlat(String),
}

pub type Result<T> = std::result::Result<T, PmeError>;
