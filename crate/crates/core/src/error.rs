use thiserror::Error;

/// Failure classes shared by every module of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// Closed forms exist only for a handful of indices.
    #[error("no closed-form solution for n = {0}")]
    UnsupportedIndex(f64),
    /// Solver configuration violates its invariants.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    /// The adaptive integrator could not make progress.
    #[error("convergence failure: {0}")]
    Convergence(String),
    /// Rational powers are only defined on single monomials.
    #[error("rational power of a non-monomial expression")]
    NonMonomialPower,
    #[error("empty source: {0}")]
    EmptySource(String),
    #[error("no usable interval: {0}")]
    UnusableInterval(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
