use num_complex::Complex64;
use thiserror::Error;

/// Errors raised by the numerical layers. Values are reported in `f64`
/// regardless of the scalar type used for the computation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point or parameter lies outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed input (wrong normalization, bad sizes, bad parameters).
    #[error("argument error: {0}")]
    Argument(String),

    /// The requested combination is not implemented.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A division by a vanishing quantity.
    #[error("singularity at z = {z}: {what}")]
    Singularity { z: Complex64, what: String },

    /// Truncating the series changes values by more than the certificate allows.
    #[error("truncation certificate failed: |f_N - f_2N| = {gap:e} at radius {radius}")]
    Truncation { gap: f64, radius: f64 },

    /// The ODE integrator could not finish.
    #[error("integration failed at t = {t}: {reason} (last state {state:?})")]
    Integration { t: f64, reason: String, state: Vec<Complex64> },

    /// A chain limit did not stabilize before the time horizon.
    #[error("horizon reached at T = {t_max} without convergence; successive differences {diffs:?}")]
    Horizon { t_max: f64, diffs: Vec<f64> },

    /// A sampled Herglotz value violates Re p > 0.
    #[error("positivity violated: Re p = {re_p:e} at z = {z}, t = {t}")]
    Positivity { z: Complex64, t: f64, re_p: f64 },

    /// Adaptive finite differences could not find a valid step.
    #[error("finite-difference step underflow at z = {z}")]
    StepUnderflow { z: Complex64 },

    /// A curve cannot be handled by the polar parametrization.
    #[error("curve is not star-shaped about {center}: {detail}")]
    NotStarShaped { center: Complex64, detail: String },

    /// An iterative solver failed to converge.
    #[error("no convergence in {what} after {iterations} iterations (last change {last:e}); {hint}")]
    NoConvergence { what: String, iterations: usize, last: f64, hint: String },

    /// A fitted or constructed map is not a valid conformal map.
    #[error("invalid map: {0}")]
    InvalidMap(String),

    /// A construction invariant failed.
    #[error("invariant violated: {0}")]
    Invariant(String),

    /// File or serialization failure.
    #[error("io error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}
