//! Errors of the command-line layer and their exit codes.

use jumpwave_bench::BenchError;
use jumpwave_vanilla::PerturbationError;
use thiserror::Error;

/// Failures surfaced to the user.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    /// The configuration or the flags are invalid.
    #[error("configuration error: {0}")]
    Config(String),
    /// A pricing engine failed.
    #[error("solver error: {0}")]
    Solver(String),
    /// Output could not be written.
    #[error("output error: {0}")]
    Io(String),
}

impl CliError {
    /// Process exit code: 2 for configuration errors, 3 for solver failures,
    /// 1 for output failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Config(_) => 2,
            Self::Solver(_) => 3,
            Self::Io(_) => 1,
        }
    }
}

/// Describes a perturbation failure in terms of the equation that failed.
pub fn describe_perturbation(e: &PerturbationError) -> String {
    match e {
        PerturbationError::BoundaryNotBracketed { order, maturity } => format!(
            "order-{order} free-boundary equation (value matching combined with smooth \
             pasting) has no root at T = {maturity}; enable numerics.tangent_fallback or \
             choose a longer maturity"
        ),
        PerturbationError::SingularSystem { order, bracket } => format!(
            "order-{order} logarithmic coefficient system is singular (leading bracket {bracket})"
        ),
        PerturbationError::PriorOrderMissing { order } => {
            format!("order {order} and its h-derivatives are needed before the next order")
        }
        PerturbationError::GridTooCoarse { nodes, required } => {
            format!("h-derivative stencil has {nodes} maturities, at least {required} are needed")
        }
        PerturbationError::Model(m) => format!("Laplace exponent root: {m}"),
        PerturbationError::European(m) => format!("European price: {m}"),
        PerturbationError::InvalidInput(m) => format!("invalid input: {m}"),
    }
}

impl From<PerturbationError> for CliError {
    fn from(e: PerturbationError) -> Self {
        match e {
            PerturbationError::InvalidInput(m) => Self::Config(m),
            other => Self::Solver(describe_perturbation(&other)),
        }
    }
}

impl From<BenchError> for CliError {
    fn from(e: BenchError) -> Self {
        match e {
            BenchError::UnstableGrid { dt, limit } => Self::Config(format!(
                "finite-difference grid: explicit time step {dt} exceeds the stability limit {limit}"
            )),
            BenchError::OutOfDomain { spot, lower, upper } => Self::Config(format!(
                "finite-difference grid: spot {spot} outside the window [{lower}, {upper}]"
            )),
            BenchError::InvalidInput(m) => Self::Config(format!("benchmark: {m}")),
            other => Self::Solver(format!("benchmark: {other}")),
        }
    }
}
