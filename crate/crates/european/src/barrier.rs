//! European single knock-out barriers under Black & Scholes.

use jumpwave_model::numerics::norm_cdf;
use jumpwave_model::ModelParams;

use crate::black::Payoff;
use crate::rebate::rebate_value;
use crate::vanilla::{Greeks, Term};
use crate::{BarrierDirection, BarrierSpec, EuropeanError, OptionSpec, Side};

/// Barrier price together with the knock-out status of the spot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierValue {
    /// Option value, or the rebate when the spot is already knocked out.
    pub price: f64,
    pub knocked_out: bool,
}

/// Vanilla pieces whose sum is the payoff restricted to the live side of the
/// barrier, as `(payoff, strike, weight)`.
fn live_payoff(spec: &OptionSpec, barrier: &BarrierSpec) -> Vec<(Payoff, f64, f64)> {
    let (k, l) = (spec.strike, barrier.level);
    match (spec.side, barrier.direction) {
        (Side::Call, BarrierDirection::DownAndOut) if l <= k => vec![(Payoff::Call, k, 1.0)],
        (Side::Call, BarrierDirection::DownAndOut) => {
            vec![(Payoff::Call, l, 1.0), (Payoff::DigitalCall, l, l - k)]
        }
        (Side::Put, BarrierDirection::UpAndOut) if l >= k => vec![(Payoff::Put, k, 1.0)],
        (Side::Put, BarrierDirection::UpAndOut) => {
            vec![(Payoff::Put, l, 1.0), (Payoff::DigitalPut, l, k - l)]
        }
        (Side::Call, BarrierDirection::UpAndOut) if l <= k => vec![],
        (Side::Call, BarrierDirection::UpAndOut) => vec![
            (Payoff::Call, k, 1.0),
            (Payoff::Call, l, -1.0),
            (Payoff::DigitalCall, l, -(l - k)),
        ],
        (Side::Put, BarrierDirection::DownAndOut) if l >= k => vec![],
        (Side::Put, BarrierDirection::DownAndOut) => vec![
            (Payoff::Put, k, 1.0),
            (Payoff::Put, l, -1.0),
            (Payoff::DigitalPut, l, -(k - l)),
        ],
    }
}

/// Price and Greeks of a European knock-out option with its rebate.
///
/// The live-side payoff `g` is priced by the reflection principle,
/// `V_g(S) - (S/L)^p V_g(L^2/S)` with `p = 1 - 2(r - delta)/sigma^2`, and the
/// rebate is added through [`rebate_value`]. A knocked-out spot returns the
/// rebate with zero sensitivities; at zero maturity the live intrinsic value
/// is returned.
pub fn european_barrier_greeks(
    model: &ModelParams,
    spec: &OptionSpec,
    barrier: &BarrierSpec,
    s0: f64,
    tau: f64,
) -> Result<Greeks, EuropeanError> {
    if !model.is_black_scholes() {
        return Err(EuropeanError::JumpsNotSupported);
    }
    barrier.validate(spec)?;
    if !(s0 > 0.0 && s0.is_finite() && tau >= 0.0 && tau.is_finite()) {
        return Err(EuropeanError::InvalidInput {
            name: "spot",
            value: s0,
            reason: "spot must be positive and maturity non-negative",
        });
    }
    let rebate = barrier.rebate_amount(spec);
    if barrier.is_knocked_out(s0) {
        return Ok(Greeks {
            price: rebate,
            ..Greeks::default()
        });
    }
    if tau == 0.0 {
        let intrinsic = spec.side.intrinsic(s0, spec.strike);
        return Ok(Greeks {
            price: intrinsic,
            delta: if intrinsic > 0.0 {
                spec.side.sign()
            } else {
                0.0
            },
            ..Greeks::default()
        });
    }

    let (r, delta, sigma) = (model.r, model.delta, model.sigma);
    let l = barrier.level;
    let p = 1.0 - 2.0 * (r - delta) / (sigma * sigma);
    let u = l * l / s0;
    let ratio = (s0 / l).powf(p);
    let term = Term::black_scholes(tau, r, delta, sigma);

    let mut out = Greeks::default();
    for (payoff, strike, weight) in live_payoff(spec, barrier) {
        out.add(term.greeks(payoff, s0, strike).scaled(weight));
        let v = term.greeks(payoff, u, strike);
        let image = Greeks {
            price: ratio * v.price,
            delta: ratio / s0 * (p * v.price - u * v.delta),
            gamma: ratio / (s0 * s0)
                * ((p - 1.0) * p * v.price - 2.0 * (p - 1.0) * u * v.delta + u * u * v.gamma),
            theta: ratio * v.theta,
            delta_theta: ratio / s0 * (p * v.theta - u * v.delta_theta),
        };
        out.add(image.scaled(-weight));
    }
    if rebate != 0.0 {
        let q = rebate_value(model, barrier.direction, l, s0, tau)?;
        out.add(
            Greeks {
                price: q.value,
                delta: q.d_s,
                gamma: q.d_ss,
                theta: q.d_t,
                delta_theta: q.d_st,
            }
            .scaled(rebate),
        );
    }
    Ok(out)
}

/// European knock-out price.
pub fn european_barrier(
    model: &ModelParams,
    spec: &OptionSpec,
    barrier: &BarrierSpec,
    s0: f64,
    tau: f64,
) -> Result<BarrierValue, EuropeanError> {
    let g = european_barrier_greeks(model, spec, barrier, s0, tau)?;
    Ok(BarrierValue {
        price: g.price,
        knocked_out: barrier.is_knocked_out(s0),
    })
}

/// Down-and-in call with `L <= K` in the closed form of Reiner and Rubinstein.
///
/// Kept as an independent check of the knock-out formulas through in-out parity.
pub fn down_and_in_call(
    model: &ModelParams,
    strike: f64,
    level: f64,
    s0: f64,
    tau: f64,
) -> Result<f64, EuropeanError> {
    if !model.is_black_scholes() {
        return Err(EuropeanError::JumpsNotSupported);
    }
    if level > strike {
        return Err(EuropeanError::InvalidBarrier(
            "down-and-in formula needs L <= K",
        ));
    }
    let (r, delta, sigma) = (model.r, model.delta, model.sigma);
    let sv = sigma * tau.sqrt();
    let lam = (r - delta + 0.5 * sigma * sigma) / (sigma * sigma);
    let y = (level * level / (s0 * strike)).ln() / sv + lam * sv;
    let ratio = level / s0;
    Ok(
        s0 * (-delta * tau).exp() * ratio.powf(2.0 * lam) * norm_cdf(y)
            - strike * (-r * tau).exp() * ratio.powf(2.0 * lam - 2.0) * norm_cdf(y - sv),
    )
}
