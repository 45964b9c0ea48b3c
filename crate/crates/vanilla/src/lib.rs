//! Higher-order quadratic approximations of American vanilla options.
//!
//! Writing the early-exercise premium as `h(T) F(h, x)` with
//! `h = 1 - exp(-rT)` and expanding `F` in powers of a bookkeeping parameter
//! attached to `d/dh` gives a hierarchy of ordinary integro-differential
//! problems. Order zero is the classical Barone-Adesi & Whaley (or Bates, with
//! jumps) approximation `c x^rho`. Every further order has the form
//! `f_n = sum_{j=0}^{2n} c_{n,j} (ln x)^j x^rho`: the coefficients `j >= 1`
//! follow from a triangular linear system driven by the `h`-derivatives of the
//! previous order, while `c_{n,0}` and the exercise boundary come from value
//! matching and smooth pasting.
//!
//! Calls use the positive root `rho+` of `Phi(rho) = r/h`, puts the negative
//! root, so that the premium vanishes deep out of the money.
//!
//! Internally everything is expressed for a unit strike; prices and boundaries
//! are rescaled by the strike on the way out.

mod error;
mod grid;
mod price;
mod report;
mod solver;
mod system;

pub mod boundary;

pub use error::PerturbationError;
pub use grid::{finite_difference_dh, MaturityGrid, DEFAULT_GRID_FLOOR, DEFAULT_GRID_NODES};
pub use price::{
    american_vanilla_price, american_vanilla_price_with, boundary_curve, BoundaryCurve,
};
pub use report::{PriceFlags, PriceReport, NEGLIGIBLE_PREMIUM};
pub use solver::{
    compute_h_derivatives, log_polynomial, log_power, order0_sensitivities, solve_order0,
    solve_ordern, trivial_premium_check, NodeCoefficients, Order0Sensitivities, OrderCoefficients,
    PerturbationSettings, PremiumRegime, VanillaSolution,
};
pub use system::{
    merton_jump_integral, merton_moment, solve_coefficient_system, CoefficientSystem,
};
