use jumpwave_european::EuropeanError;
use jumpwave_model::ModelError;
use thiserror::Error;

/// Failures of the perturbation solvers.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PerturbationError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    European(#[from] EuropeanError),
    /// The boundary equation has no sign change inside the admissible range.
    #[error("boundary equation bracket failed at order {order}, maturity {maturity}")]
    BoundaryNotBracketed { order: usize, maturity: f64 },
    /// The leading coefficient of the triangular system vanishes.
    #[error("coefficient system is singular at order {order} (leading bracket {bracket})")]
    SingularSystem { order: usize, bracket: f64 },
    /// Order `n` was requested before orders `0..n` were solved with h-derivatives.
    #[error("order {order} requires all lower orders with their h-derivatives")]
    PriorOrderMissing { order: usize },
    /// Finite differences in `h` need at least three grid nodes.
    #[error("maturity grid has {nodes} nodes, at least {required} are needed")]
    GridTooCoarse { nodes: usize, required: usize },
    /// Input outside the documented domain.
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
