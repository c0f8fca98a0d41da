use thiserror::Error;

/// Errors raised by the numerical routines in this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain on which the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A root search was started on an interval without a sign change.
    #[error("bracket error: f({lo}) = {f_lo} and f({hi}) = {f_hi} have the same sign")]
    Bracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },
    /// An iterative method did not reach its tolerance.
    #[error("did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },
    /// A generic numerical failure (no real root, non-finite value, ...).
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The requested design is degenerate (e.g. zero or maximal distortion).
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
    /// Two routes to the same quantity disagree beyond tolerance.
    #[error("consistency failure: {0}")]
    Consistency(String),
    /// A bound was requested outside its validity range.
    #[error("validity error: {0}")]
    Validity(String),
    /// The requested point lies outside the region where a closed form is known.
    #[error("out of region: {0}")]
    OutOfRegion(String),
    /// The source model violates detectability or stability requirements.
    #[error("detectability error: {0}")]
    Detectability(String),
    /// A Monte Carlo estimate could not be formed.
    #[error("estimation error: {0}")]
    Estimation(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
