//! Asset dynamics for jump-diffusion option pricing.
//!
//! The crate covers three exponential Lévy models sharing one parametrisation:
//! Black & Scholes (no jumps), a constant log-jump of size `phi` and Merton's
//! normally distributed log-jumps. Everything the pricing layers need from the
//! dynamics is exposed through the Laplace exponent
//!
//! ```text
//! Phi(theta) = (r - delta - lambda*zeta - sigma^2/2) theta + sigma^2 theta^2 / 2
//!              + lambda (E[exp(theta J)] - 1)
//! ```
//!
//! its two inverse branches and the sensitivity of those roots to the
//! time-change variable `h = 1 - exp(-r T)`.
//!
//! The [`numerics`] module holds the scalar tools shared by the downstream
//! crates: an `erfc`-based normal distribution and a bracketed Brent solver.

mod error;
mod model;
pub mod numerics;

pub use error::ModelError;
pub use model::{Branch, JumpSpec, ModelParams};
