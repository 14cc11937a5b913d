//! Error type shared by every module of the crate.

use thiserror::Error;

/// Errors raised by constructions, oracles and checkers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// The requested `(m, k)` pair admits no Heisenberg-type structure.
    #[error("no H-type algebra with dim v = {m}, dim z = {k}: m must be a positive multiple of {min_m} (smallest feasible m is {min_m})")]
    InfeasibleDimensions { m: usize, k: usize, min_m: usize },

    /// Vector arguments do not match the algebra dimensions.
    #[error("dimension mismatch in {context}: expected {expected}, got {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    /// A scalar argument is outside the domain of the operation.
    #[error("invalid argument `{name}` = {value}: {reason}")]
    InvalidArgument {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not converge in {context} (estimated error {error:e}, tolerance {tolerance:e})")]
    QuadratureNonConvergent {
        context: &'static str,
        error: f64,
        tolerance: f64,
    },

    /// The truncated spectral tail is too large relative to the value.
    #[error("spectral tail bound {tail:e} exceeds tolerance relative to value scale {scale:e}")]
    TailTooLarge { tail: f64, scale: f64 },

    /// The ODE stepper could not make progress.
    #[error("ODE step size underflow at r = {r} (h = {h:e})")]
    StepSizeUnderflow { r: f64, h: f64 },

    /// A series expansion did not reach its tolerance within the term budget.
    #[error("series in {context} did not converge after {terms} terms")]
    SeriesNonConvergent { context: &'static str, terms: usize },

    /// Two independent evaluation routes disagree.
    #[error("{context}: routes disagree (a = {a:e}, b = {b:e}, relative gap {gap:e})")]
    RouteDisagreement {
        context: &'static str,
        a: f64,
        b: f64,
        gap: f64,
    },

    /// Hypotheses of the derivative-propagation lemma are violated.
    #[error("propagation hypothesis violated: {0}")]
    HypothesisViolation(&'static str),

    /// Method-of-lines solve became unstable.
    #[error("PDE solve failed: {0}")]
    PdeFailure(String),

    /// A supremum over time does not exist (the damped kernel grows in t).
    #[error("supremum diverges: {0}")]
    Divergent(String),
}

pub type Result<T> = std::result::Result<T, Error>;
