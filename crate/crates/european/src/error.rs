use thiserror::Error;

/// Failures of the European pricers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EuropeanError {
    /// The Poisson series did not reach its truncation tolerance.
    #[error("Poisson series not converged after {terms} terms (lambda*T = {intensity})")]
    SeriesNotConverged { terms: usize, intensity: f64 },
    /// The pricer only supports pure diffusion dynamics.
    #[error("barrier and rebate formulas require Black & Scholes dynamics")]
    JumpsNotSupported,
    /// An input is outside the documented domain.
    #[error("invalid input {name} = {value}: {reason}")]
    InvalidInput {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// A contract combination that the barrier conventions forbid.
    #[error("invalid barrier contract: {0}")]
    InvalidBarrier(&'static str),
}
