//! Independent reference prices for the perturbation expansions.
//!
//! Two engines are provided. [`fd_american_vanilla`] solves the
//! partial integro-differential equation of an American vanilla under Black &
//! Scholes, constant-jump or Merton dynamics with a fully explicit scheme in
//! log-moneyness. It evolves the early-exercise premium rather than the full
//! price, adding the European value from the closed-form series at the end.
//! [`tree_american_barrier`] is a Ritchken trinomial lattice for American
//! down-and-out calls and up-and-out puts under Black & Scholes, stretched so
//! that a node layer sits exactly on the barrier.

mod error;
mod fd;
mod tree;

pub use error::BenchError;
pub use fd::{fd_american_vanilla, FdGridSpec, FdResult};
pub use tree::{align_steps, tree_american_barrier, TreeSpec, MIN_TREE_STEPS, STRETCH_RANGE};
