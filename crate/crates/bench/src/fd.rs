//! Explicit finite differences for the early-exercise premium of American
//! vanillas under jump-diffusions.
//!
//! In log-moneyness `x = ln(S/K)` and time to maturity `tau`, the premium
//! `E = V - V_E` solves the same linear equation as the price,
//!
//! `E_tau = sigma^2/2 E_xx + (r - delta - lambda zeta - sigma^2/2) E_x - (r + lambda) E + lambda int E(x + j) nu(dj)`,
//!
//! starts from `E(0, x) = 0` and is projected after every step onto the
//! obstacle `E >= payoff - V_E(tau)`. The spot is placed on a node, the
//! jump integral is a trapezoid on multiples of the grid spacing (normal
//! log-jumps) or a linearly interpolated shift (constant log-jumps), and the
//! far field holds `max(payoff - V_E, 0)`, which is the exercised premium on
//! the in-the-money side and zero on the other.

use jumpwave_european::{european_vanilla, OptionSpec};
use jumpwave_model::{JumpSpec, ModelParams};
use serde::{Deserialize, Serialize};

use crate::BenchError;

/// Time steps stay this fraction below the stability limit when chosen
/// automatically.
const STABILITY_SAFETY: f64 = 0.9;

/// Log-moneyness grid of the explicit scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FdGridSpec {
    /// Lower end of the log-moneyness window.
    pub x_min: f64,
    /// Upper end of the log-moneyness window.
    pub x_max: f64,
    /// Number of space nodes across the window.
    pub n_space: usize,
    /// Number of time steps; derived from the stability limit when absent.
    pub n_time: Option<usize>,
    /// Half-width of the normal jump quadrature in units of the jump
    /// standard deviation.
    pub jump_width: f64,
}

impl Default for FdGridSpec {
    fn default() -> Self {
        Self {
            x_min: -3.0,
            x_max: 3.0,
            n_space: 801,
            n_time: None,
            jump_width: 6.0,
        }
    }
}

impl FdGridSpec {
    /// Space step.
    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.n_space - 1) as f64
    }

    /// Largest stable time step for `model`: every node of the explicit
    /// update must be a non-negative combination of the previous values.
    pub fn stability_limit(&self, model: &ModelParams) -> f64 {
        let dx = self.dx();
        1.0 / (model.sigma.powi(2) / (dx * dx) + model.r.max(0.0) + model.effective_lambda())
    }

    fn validate(&self, model: &ModelParams) -> Result<(), BenchError> {
        if !(self.x_min < 0.0
            && self.x_max > 0.0
            && self.x_min.is_finite()
            && self.x_max.is_finite())
        {
            return Err(BenchError::InvalidInput(format!(
                "log-moneyness window [{}, {}] must contain 0",
                self.x_min, self.x_max
            )));
        }
        if self.n_space < 5 {
            return Err(BenchError::InvalidInput(format!(
                "at least 5 space nodes are needed, got {}",
                self.n_space
            )));
        }
        if !(self.jump_width > 0.0) {
            return Err(BenchError::InvalidInput(format!(
                "jump quadrature width must be positive, got {}",
                self.jump_width
            )));
        }
        if model.sigma <= 0.0 {
            return Err(BenchError::InvalidInput(
                "the explicit scheme needs a positive diffusion".into(),
            ));
        }
        let dx = self.dx();
        let drift = model.log_drift();
        if drift.abs() * dx > model.sigma.powi(2) {
            return Err(BenchError::InvalidInput(format!(
                "drift {drift} dominates diffusion on spacing {dx}; refine the grid"
            )));
        }
        Ok(())
    }
}

/// Output of one finite-difference solve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FdResult {
    /// American price.
    pub price: f64,
    /// European price from the closed-form series.
    pub european: f64,
    /// Early-exercise premium from the grid.
    pub premium: f64,
    /// Time step used.
    pub dt: f64,
    /// Number of time steps.
    pub n_time: usize,
}

/// Jump integral as weights on integer node offsets.
enum JumpStencil {
    None,
    /// `sum_m w_m E(x + m dx)`.
    Nodes {
        offsets: Vec<isize>,
        weights: Vec<f64>,
    },
    /// `(1 - w) E(x + m dx) + w E(x + (m + 1) dx)`.
    Shift {
        offset: isize,
        w: f64,
    },
}

impl JumpStencil {
    fn new(model: &ModelParams, dx: f64, width: f64) -> Self {
        if model.effective_lambda() == 0.0 {
            return Self::None;
        }
        match model.jump {
            JumpSpec::None => Self::None,
            JumpSpec::Constant { phi } => {
                let m = (phi / dx).floor();
                Self::Shift {
                    offset: m as isize,
                    w: phi / dx - m,
                }
            }
            JumpSpec::Normal { mu, sigma } => {
                let lo = ((mu - width * sigma) / dx).floor() as isize;
                let hi = ((mu + width * sigma) / dx).ceil() as isize;
                let offsets: Vec<isize> = (lo..=hi).collect();
                let density = |j: f64| (-0.5 * ((j - mu) / sigma).powi(2)).exp();
                let mut weights: Vec<f64> =
                    offsets.iter().map(|&m| density(m as f64 * dx)).collect();
                weights[0] *= 0.5;
                let last = weights.len() - 1;
                weights[last] *= 0.5;
                let total: f64 = weights.iter().sum();
                weights.iter_mut().for_each(|w| *w /= total);
                Self::Nodes { offsets, weights }
            }
        }
    }

    /// Smallest and largest node offsets the integral touches.
    fn reach(&self) -> (isize, isize) {
        match self {
            Self::None => (0, 0),
            Self::Shift { offset, .. } => (*offset, *offset + 1),
            Self::Nodes { offsets, .. } => (offsets[0], offsets[offsets.len() - 1]),
        }
    }

    fn apply(&self, e: &[f64], i: usize) -> f64 {
        let at = |m: isize| e[(i as isize + m) as usize];
        match self {
            Self::None => 0.0,
            Self::Shift { offset, w } => (1.0 - w) * at(*offset) + w * at(*offset + 1),
            Self::Nodes { offsets, weights } => {
                offsets.iter().zip(weights).map(|(&m, w)| w * at(m)).sum()
            }
        }
    }
}

/// American vanilla price by explicit finite differences on the premium.
pub fn fd_american_vanilla(
    model: &ModelParams,
    spec: &OptionSpec,
    s0: f64,
    tau: f64,
    grid: &FdGridSpec,
) -> Result<FdResult, BenchError> {
    model.validate()?;
    spec.validate()?;
    grid.validate(model)?;
    if !(s0 > 0.0 && s0.is_finite() && tau >= 0.0 && tau.is_finite()) {
        return Err(BenchError::InvalidInput(format!(
            "spot must be positive and maturity non-negative, got S0 = {s0}, T = {tau}"
        )));
    }
    let k = spec.strike;
    let x0 = (s0 / k).ln();
    if x0 < grid.x_min || x0 > grid.x_max {
        return Err(BenchError::OutOfDomain {
            spot: s0,
            lower: k * grid.x_min.exp(),
            upper: k * grid.x_max.exp(),
        });
    }
    let european = european_vanilla(model, spec, s0, tau)?;
    let dx = grid.dx();
    let limit = grid.stability_limit(model);
    let n_time = match grid.n_time {
        Some(n) if n > 0 => n,
        Some(_) => return Err(BenchError::InvalidInput("n_time must be positive".into())),
        None => (tau / (STABILITY_SAFETY * limit)).ceil().max(1.0) as usize,
    };
    let dt = tau / n_time as f64;
    if dt > limit {
        return Err(BenchError::UnstableGrid { dt, limit });
    }
    if tau == 0.0 {
        return Ok(FdResult {
            price: european,
            european,
            premium: 0.0,
            dt,
            n_time,
        });
    }

    // Nodes x0 + j dx for j in lo..=hi cover the window; the jump stencil
    // needs extra far-field nodes beyond both ends.
    let lo = ((grid.x_min - x0) / dx).ceil() as isize;
    let hi = ((grid.x_max - x0) / dx).floor() as isize;
    let stencil = JumpStencil::new(model, dx, grid.jump_width);
    let (reach_lo, reach_hi) = stencil.reach();
    let pad_lo = (-reach_lo).max(0) + 1;
    let pad_hi = reach_hi.max(0) + 1;
    let first = lo - pad_lo;
    let len = (hi + pad_hi - first + 1) as usize;
    let spots: Vec<f64> = (0..len)
        .map(|i| k * (x0 + (first + i as isize) as f64 * dx).exp())
        .collect();
    let intrinsic: Vec<f64> = spots.iter().map(|&s| spec.side.intrinsic(s, k)).collect();
    // Interior nodes are updated by the scheme; all others are far field.
    let interior = (lo + 1 - first) as usize..=(hi - 1 - first) as usize;
    let centre = (-first) as usize;

    let lambda = model.effective_lambda();
    let a = 0.5 * model.sigma.powi(2) / (dx * dx);
    let b = model.log_drift() / (2.0 * dx);
    let (up, mid, down) = (
        dt * (a + b),
        1.0 - dt * (2.0 * a + model.r + lambda),
        dt * (a - b),
    );
    let obstacle = |i: usize, t: f64| -> Result<f64, BenchError> {
        Ok(intrinsic[i] - european_vanilla(model, spec, spots[i], t)?)
    };

    let mut e = vec![0.0; len];
    let mut next = vec![0.0; len];
    for step in 1..=n_time {
        let t = step as f64 * dt;
        for i in interior.clone() {
            let jump = if lambda > 0.0 {
                dt * lambda * stencil.apply(&e, i)
            } else {
                0.0
            };
            let v = up * e[i + 1] + mid * e[i] + down * e[i - 1] + jump;
            // The obstacle is below the payoff, so it can only bind where
            // the candidate premium is below the payoff.
            next[i] = if intrinsic[i] > v {
                v.max(obstacle(i, t)?)
            } else {
                v
            };
        }
        for i in (0..len).filter(|i| !interior.contains(i)) {
            next[i] = if intrinsic[i] > 0.0 {
                obstacle(i, t)?.max(0.0)
            } else {
                0.0
            };
        }
        std::mem::swap(&mut e, &mut next);
    }
    let premium = e[centre];
    Ok(FdResult {
        price: european + premium,
        european,
        premium,
        dt,
        n_time,
    })
}
