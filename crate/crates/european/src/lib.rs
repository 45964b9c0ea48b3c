//! European pricing under Black & Scholes, constant-jump and Merton dynamics.
//!
//! Vanilla prices are Poisson-weighted sums of Black kernels, which reduce to
//! the closed form when there are no jumps. Barrier prices are available under
//! Black & Scholes through the reflection principle, together with the
//! discounted hitting-time transform used to value rebates paid at the hit.
//!
//! Every pricer also returns the spatial derivatives up to second order and the
//! maturity derivatives that the early-exercise solvers differentiate through.

mod barrier;
mod black;
mod error;
mod rebate;
mod spec;
mod vanilla;

pub use barrier::{down_and_in_call, european_barrier, european_barrier_greeks, BarrierValue};
pub use black::{bs_kernel, BlackPartials};
pub use error::EuropeanError;
pub use rebate::{rebate_value, RebateTransform};
pub use spec::{BarrierDirection, BarrierSpec, OptionSpec, RebateRule, Side};
pub use vanilla::{
    european_vanilla, european_vanilla_delta, european_vanilla_gamma, european_vanilla_greeks,
    european_vanilla_theta, Greeks, SERIES_MAX_TERMS,
};
