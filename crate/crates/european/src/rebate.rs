//! Discounted first-passage transform used for rebates paid at the hit.

use jumpwave_model::numerics::{norm_cdf, norm_pdf};
use jumpwave_model::ModelParams;

use crate::{BarrierDirection, EuropeanError};

/// `E[exp(-r tau_L) 1{tau_L <= T}]` for the first passage time `tau_L` of the
/// spot to the barrier, with its spot and maturity derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RebateTransform {
    pub value: f64,
    pub d_s: f64,
    pub d_ss: f64,
    pub d_t: f64,
    pub d_st: f64,
}

/// Hitting transform under Black & Scholes.
///
/// With `nu = (r - delta - sigma^2/2) / sigma`, `y = ln(L/S) / sigma` and
/// `gamma = sqrt(2r + nu^2)`, a down barrier (`y < 0`) gives
///
/// ```text
/// q = exp((nu - gamma) y) N((y - gamma T)/sqrt(T)) + exp((nu + gamma) y) N((y + gamma T)/sqrt(T)).
/// ```
///
/// An up barrier is the mirror image: reflect the log-price, which flips the
/// signs of both `y` and `nu`. A spot already on the barrier returns one.
pub fn rebate_value(
    model: &ModelParams,
    direction: BarrierDirection,
    level: f64,
    s0: f64,
    tau: f64,
) -> Result<RebateTransform, EuropeanError> {
    if !model.is_black_scholes() {
        return Err(EuropeanError::JumpsNotSupported);
    }
    if !(s0 > 0.0 && level > 0.0 && tau >= 0.0) {
        return Err(EuropeanError::InvalidInput {
            name: "spot",
            value: s0,
            reason: "spot and barrier must be positive and maturity non-negative",
        });
    }
    let hit = match direction {
        BarrierDirection::DownAndOut => s0 <= level,
        BarrierDirection::UpAndOut => s0 >= level,
    };
    if hit {
        return Ok(RebateTransform {
            value: 1.0,
            ..RebateTransform::default()
        });
    }
    if tau == 0.0 {
        return Ok(RebateTransform::default());
    }
    let sigma = model.sigma;
    let nu = (model.r - model.delta - 0.5 * sigma * sigma) / sigma;
    let y = (level / s0).ln() / sigma;
    let (flip, y_down, nu_down) = match direction {
        BarrierDirection::DownAndOut => (1.0, y, nu),
        BarrierDirection::UpAndOut => (-1.0, -y, -nu),
    };
    let q = down_transform(model.r, nu_down, y_down, tau);
    // Back to the original y, then to spot coordinates with dy/dS = -1/(sigma S).
    let q_y = flip * q.d_y;
    let q_yy = q.d_yy;
    let q_yt = flip * q.d_yt;
    Ok(RebateTransform {
        value: q.value,
        d_s: -q_y / (sigma * s0),
        d_ss: q_yy / (sigma * sigma * s0 * s0) + q_y / (sigma * s0 * s0),
        d_t: q.d_t,
        d_st: -q_yt / (sigma * s0),
    })
}

struct DownTransform {
    value: f64,
    d_y: f64,
    d_yy: f64,
    d_t: f64,
    d_yt: f64,
}

/// `exp(a) N(z)` without overflowing when `a` is large and `N(z)` tiny.
fn exp_times_cdf(a: f64, z: f64) -> f64 {
    let n = norm_cdf(z);
    if n == 0.0 {
        0.0
    } else {
        (a + n.ln()).exp()
    }
}

fn down_transform(r: f64, nu: f64, y: f64, t: f64) -> DownTransform {
    let gamma = (2.0 * r + nu * nu).sqrt();
    let st = t.sqrt();
    let z1 = (y - gamma * t) / st;
    let z2 = (y + gamma * t) / st;
    let a = exp_times_cdf((nu - gamma) * y, z1);
    let b = exp_times_cdf((nu + gamma) * y, z2);
    // Both density terms coincide: exp((nu - gamma) y) pdf(z1) = exp((nu + gamma) y) pdf(z2).
    let e = ((nu + gamma) * y).exp() * norm_pdf(z2);
    let c = e / st;
    let dz1 = -y / (2.0 * t * st) - gamma / (2.0 * st);
    let dz2 = -y / (2.0 * t * st) + gamma / (2.0 * st);
    let dc = -e * z2 * dz2 / st - e / (2.0 * t * st);
    DownTransform {
        value: a + b,
        d_y: (nu - gamma) * a + (nu + gamma) * b + 2.0 * c,
        d_yy: (nu - gamma).powi(2) * a
            + (nu + gamma).powi(2) * b
            + c * (4.0 * nu + 2.0 * gamma - 2.0 * z2 / st),
        d_t: -e * y / (t * st),
        d_yt: (nu - gamma) * e * dz1 + (nu + gamma) * e * dz2 + 2.0 * dc,
    }
}
