//! Ritchken trinomial lattice for knock-out options under Black & Scholes.
//!
//! Log-price moves by `+-k sigma sqrt(dt)` or stays put. The stretch `k >= 1`
//! is chosen so that the barrier lies an integer number of moves from the
//! spot, which removes the first-order barrier bias of unaligned lattices.
//! Probabilities match the first two moments of the log-return:
//! `p_u,d = 1/(2k^2) +- nu sqrt(dt)/(2 k sigma)` and `p_m = 1 - 1/k^2` with
//! `nu = r - delta - sigma^2/2`. Nodes on or beyond the barrier pay the
//! rebate.

use jumpwave_european::{BarrierDirection, BarrierSpec, OptionSpec};
use jumpwave_model::ModelParams;
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Lattice settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeSpec {
    /// Number of time steps.
    pub n_steps: usize,
    /// Allow early exercise; `false` prices the European knock-out.
    pub american: bool,
}

impl Default for TreeSpec {
    fn default() -> Self {
        Self {
            n_steps: 5000,
            american: true,
        }
    }
}

/// Smallest number of time steps accepted.
pub const MIN_TREE_STEPS: usize = 100;

/// Admissible range of the stretch parameter.
pub const STRETCH_RANGE: (f64, f64) = (std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::SQRT_2);

/// Smallest step count `n >= requested` for which the barrier lies `layers`
/// moves from the spot with a stretch in `[1, sqrt 2]`.
///
/// With `m` layers the stretch is `d sqrt(n) / (m sigma sqrt(T))`, so layer
/// counts `m` admit step counts between `(m sigma sqrt(T) / d)^2` and twice
/// that. The ranges of consecutive `m` overlap from `m = 3` on, so a valid
/// count always exists; it only exceeds `requested` when the spot is within
/// a few moves of the barrier.
pub fn align_steps(
    distance: f64,
    sigma: f64,
    tau: f64,
    requested: usize,
) -> Result<(usize, usize, f64), BenchError> {
    let unit = sigma * tau.sqrt() / distance;
    let stretch_of = |n: usize, m: usize| distance / (m as f64 * sigma * (tau / n as f64).sqrt());
    let first = ((requested as f64).sqrt() / (unit * STRETCH_RANGE.1))
        .floor()
        .max(1.0) as usize;
    for m in first..first + 64 {
        let lowest = (m as f64 * unit).powi(2).ceil() as usize;
        let n = requested.max(lowest);
        let k = stretch_of(n, m);
        if (1.0..=STRETCH_RANGE.1).contains(&k) {
            return Ok((n, m, k));
        }
    }
    Err(BenchError::InvalidInput(format!(
        "no step count aligns a node layer with the barrier at distance {distance}"
    )))
}

/// Price of an American (or European) down-and-out call or up-and-out put.
///
/// Any side and direction combination is accepted; the lattice only needs
/// the barrier side. The spot must be on the live side. When the requested
/// step count cannot align a node layer with the barrier, the smallest larger
/// count that can is used (see [`align_steps`]).
pub fn tree_american_barrier(
    model: &ModelParams,
    spec: &OptionSpec,
    barrier: &BarrierSpec,
    s0: f64,
    tau: f64,
    tree: &TreeSpec,
) -> Result<f64, BenchError> {
    model.validate()?;
    spec.validate()?;
    barrier.validate(spec)?;
    if !model.is_black_scholes() {
        return Err(jumpwave_european::EuropeanError::JumpsNotSupported.into());
    }
    if tree.n_steps < MIN_TREE_STEPS {
        return Err(BenchError::InvalidInput(format!(
            "at least {MIN_TREE_STEPS} steps are needed, got {}",
            tree.n_steps
        )));
    }
    if !(s0 > 0.0 && s0.is_finite() && tau >= 0.0 && tau.is_finite()) {
        return Err(BenchError::InvalidInput(format!(
            "spot must be positive and maturity non-negative, got S0 = {s0}, T = {tau}"
        )));
    }
    let k = spec.strike;
    let rebate = barrier.rebate_amount(spec);
    if barrier.is_knocked_out(s0) {
        return Ok(rebate);
    }
    let payoff = |s: f64| spec.side.intrinsic(s, k);
    if tau == 0.0 {
        return Ok(payoff(s0));
    }

    let sigma = model.sigma;
    let distance = (s0 / barrier.level).ln().abs();
    let (n, layers, stretch) = align_steps(distance, sigma, tau, tree.n_steps)?;
    let dt = tau / n as f64;
    let base = sigma * dt.sqrt();
    let dy = stretch * base;
    let nu = model.r - model.delta - 0.5 * sigma * sigma;
    let drift = nu * dt.sqrt() / (2.0 * stretch * sigma);
    let (pu, pm, pd) = (
        0.5 / (stretch * stretch) + drift,
        1.0 - 1.0 / (stretch * stretch),
        0.5 / (stretch * stretch) - drift,
    );
    if pu < 0.0 || pd < 0.0 {
        return Err(BenchError::InvalidInput(format!(
            "negative branch probability with {n} steps; increase the step count"
        )));
    }
    let disc = (-model.r * dt).exp();

    // Node j (offset n) sits at log-spot ln S0 + j dy; the barrier layer is
    // j = -layers below the spot or j = +layers above it.
    let dead = |j: isize| match barrier.direction {
        BarrierDirection::DownAndOut => j <= -(layers as isize),
        BarrierDirection::UpAndOut => j >= layers as isize,
    };
    let spot = |j: isize| s0 * (j as f64 * dy).exp();
    let width = 2 * n + 1;
    let mut v: Vec<f64> = (0..width)
        .map(|i| {
            let j = i as isize - n as isize;
            if dead(j) {
                rebate
            } else {
                payoff(spot(j))
            }
        })
        .collect();
    let mut next = vec![0.0; width];
    for step in (0..n).rev() {
        for i in (n - step)..=(n + step) {
            let j = i as isize - n as isize;
            next[i] = if dead(j) {
                rebate
            } else {
                let cont = disc * (pu * v[i + 1] + pm * v[i] + pd * v[i - 1]);
                if tree.american {
                    cont.max(payoff(spot(j)))
                } else {
                    cont
                }
            };
        }
        std::mem::swap(&mut v, &mut next);
    }
    Ok(v[n])
}
