use jumpwave_european::EuropeanError;
use jumpwave_model::ModelError;
use thiserror::Error;

/// Failures of the benchmark engines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BenchError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    European(#[from] EuropeanError),
    /// The explicit time step exceeds the stability limit of the grid.
    #[error("explicit scheme unstable: time step {dt} exceeds the limit {limit}")]
    UnstableGrid { dt: f64, limit: f64 },
    /// The spot lies outside the log-moneyness window of the grid.
    #[error("spot {spot} outside the grid window [{lower}, {upper}]")]
    OutOfDomain { spot: f64, lower: f64, upper: f64 },
    /// Input outside the documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
