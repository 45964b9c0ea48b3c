use thiserror::Error;

/// Failures raised while validating dynamics or inverting the Laplace exponent.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// A model parameter is outside its admissible range.
    #[error("invalid model parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    /// The exponent can only be inverted at strictly positive levels.
    #[error("Laplace exponent roots require a positive target, got {0}")]
    NonPositiveTarget(f64),
    /// The safeguarded Newton iteration ran out of budget.
    #[error(
        "Laplace exponent root for target {target} did not converge in {iterations} iterations"
    )]
    NoConvergence { target: f64, iterations: usize },
    /// The exponent is flat at the root, so the implicit derivative is undefined.
    #[error("Laplace exponent slope vanishes at theta = {rho}")]
    DegenerateSlope { rho: f64 },
}
