//! Higher-order quadratic approximations of American knock-out options under
//! Black & Scholes.
//!
//! The early-exercise premium of a down-and-out call is written as
//! `h(T) F(h, x)` exactly as for vanilla options, but the knock-out condition
//! `F(h, L) = 0` keeps both roots of `sigma^2/2 rho (rho - 1) + (r - delta) rho = r/h`
//! in play. Every order is therefore a sum of two families
//! `sum_j c+_{n,j} (ln x)^j x^rho+ + sum_j c-_{n,j} (ln x)^j x^rho-`. The
//! logarithmic coefficients of each family solve the vanilla triangular system
//! with its own root; the two constant terms and the exercise boundary follow
//! from the barrier condition, value matching and smooth pasting.
//!
//! Up-and-out puts reuse the same template with the knock-out region above the
//! barrier and the exercise region below the boundary. In-the-money barriers
//! pay the intrinsic value at the hit.

mod price;
mod problem;
mod solver;

pub use price::{
    american_barrier_price, american_barrier_price_with, barrier_boundary_curve,
    BarrierBoundaryCurve,
};
pub use problem::{uop_transform, BarrierProblem};
pub use solver::{
    barrier_order0_sensitivities, compute_barrier_h_derivatives, solve_barrier_order0,
    solve_barrier_ordern, BarrierNode, BarrierOrder0Sensitivities, BarrierOrderCoefficients,
    BarrierSolution,
};
