//! Poisson-weighted Black series for European vanillas.

use jumpwave_model::{JumpSpec, ModelParams};

use crate::black::{BlackPartials, Payoff};
use crate::{EuropeanError, OptionSpec, Side};

/// Hard cap on the number of series terms; `170!` is the largest factorial a
/// double can hold.
pub const SERIES_MAX_TERMS: usize = 171;
const SERIES_RTOL: f64 = 1e-12;

/// Price with its spot and maturity sensitivities.
///
/// `theta` and `delta_theta` differentiate with respect to the time to
/// maturity `T`, not calendar time, so a long-dated call usually has a
/// positive `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Greeks {
    pub price: f64,
    /// `dV/dS`
    pub delta: f64,
    /// `d2V/dS2`
    pub gamma: f64,
    /// `dV/dT`
    pub theta: f64,
    /// `d2V/dS dT`
    pub delta_theta: f64,
}

impl Greeks {
    pub(crate) fn scaled(self, w: f64) -> Self {
        Self {
            price: w * self.price,
            delta: w * self.delta,
            gamma: w * self.gamma,
            theta: w * self.theta,
            delta_theta: w * self.delta_theta,
        }
    }

    pub(crate) fn add(&mut self, other: Self) {
        self.price += other.price;
        self.delta += other.delta;
        self.gamma += other.gamma;
        self.theta += other.theta;
        self.delta_theta += other.delta_theta;
    }
}

/// One lognormal term `D(T) B(S g(T), v(T))`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Term {
    /// Discount factor times Poisson weight.
    pub discount: f64,
    /// `dD/dT`.
    pub d_discount: f64,
    /// Forward per unit spot, `g = F / S`.
    pub growth: f64,
    /// `d ln g / dT`.
    pub d_log_growth: f64,
    /// Total variance.
    pub variance: f64,
    /// `dv/dT`.
    pub d_variance: f64,
}

impl Term {
    /// Plain Black & Scholes term with yield `delta`.
    pub(crate) fn black_scholes(t: f64, r: f64, delta: f64, sigma: f64) -> Self {
        let disc = (-r * t).exp();
        Self {
            discount: disc,
            d_discount: -r * disc,
            growth: ((r - delta) * t).exp(),
            d_log_growth: r - delta,
            variance: sigma * sigma * t,
            d_variance: sigma * sigma,
        }
    }

    pub(crate) fn greeks(&self, payoff: Payoff, s: f64, k: f64) -> Greeks {
        let g = self.growth;
        let f = s * g;
        let b = BlackPartials::new(payoff, f, self.variance, k);
        let (d, dd, mu, vt) = (
            self.discount,
            self.d_discount,
            self.d_log_growth,
            self.d_variance,
        );
        Greeks {
            price: d * b.value,
            delta: d * b.d_f * g,
            gamma: d * b.d_ff * g * g,
            theta: dd * b.value + d * (b.d_f * f * mu + b.d_v * vt),
            delta_theta: dd * b.d_f * g
                + d * g * (b.d_ff * f * mu + b.d_fv * vt)
                + d * b.d_f * g * mu,
        }
    }
}

fn payoff_of(side: Side) -> Payoff {
    match side {
        Side::Call => Payoff::Call,
        Side::Put => Payoff::Put,
    }
}

fn check_inputs(s0: f64, tau: f64) -> Result<(), EuropeanError> {
    if !(s0 >= 0.0 && s0.is_finite()) {
        return Err(EuropeanError::InvalidInput {
            name: "spot",
            value: s0,
            reason: "must be finite and non-negative",
        });
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(EuropeanError::InvalidInput {
            name: "maturity",
            value: tau,
            reason: "must be finite and non-negative",
        });
    }
    Ok(())
}

/// European price and Greeks at spot `s0` and time to maturity `tau`.
///
/// Conditional on `n` jumps the terminal log-price is normal, so the price is
/// `sum_n w_n(T) exp(-rT) B(F_n, v_n)` with Poisson weights `w_n`, forwards
/// `F_n = S exp((r - delta - lambda zeta) T + n ln(1 + zeta))` and total
/// variances `v_n = sigma^2 T + n sigma_M^2`. The series stops once a term
/// falls below `1e-12` of the running sum past the Poisson mode. Greeks are
/// obtained by differentiating the series term by term.
pub fn european_vanilla_greeks(
    model: &ModelParams,
    spec: &OptionSpec,
    s0: f64,
    tau: f64,
) -> Result<Greeks, EuropeanError> {
    check_inputs(s0, tau)?;
    let k = spec.strike;
    if tau == 0.0 {
        let itm = spec.side.intrinsic(s0, k) > 0.0;
        return Ok(Greeks {
            price: spec.side.intrinsic(s0, k),
            delta: if itm { spec.side.sign() } else { 0.0 },
            ..Greeks::default()
        });
    }
    let payoff = payoff_of(spec.side);
    let lam = model.effective_lambda();
    if lam == 0.0 {
        return Ok(
            Term::black_scholes(tau, model.r, model.delta, model.sigma).greeks(payoff, s0, k)
        );
    }

    let lt = lam * tau;
    let mu_f = model.r - model.delta - lam * model.zeta();
    let s2 = model.jump_log_variance();
    let log_jump = match model.jump {
        JumpSpec::Normal { mu, sigma } => mu + 0.5 * sigma * sigma,
        _ => model.jump_log_mean(),
    };
    let disc = (-model.r * tau).exp();
    let mut sum = Greeks::default();
    for n in 0..SERIES_MAX_TERMS {
        let nf = n as f64;
        let log_w = -lt + nf * lt.ln() - libm::lgamma(nf + 1.0);
        let w = log_w.exp();
        let term = Term {
            discount: disc * w,
            d_discount: disc * w * (-model.r - lam + nf / tau),
            growth: (mu_f * tau + nf * log_jump).exp(),
            d_log_growth: mu_f,
            variance: model.sigma * model.sigma * tau + nf * s2,
            d_variance: model.sigma * model.sigma,
        }
        .greeks(payoff, s0, k);
        let small = term.price.abs() < SERIES_RTOL * (sum.price.abs() + 1e-300);
        sum.add(term);
        if nf >= lt && small {
            return Ok(sum);
        }
    }
    Err(EuropeanError::SeriesNotConverged {
        terms: SERIES_MAX_TERMS,
        intensity: lt,
    })
}

/// European price.
pub fn european_vanilla(
    model: &ModelParams,
    spec: &OptionSpec,
    s0: f64,
    tau: f64,
) -> Result<f64, EuropeanError> {
    european_vanilla_greeks(model, spec, s0, tau).map(|g| g.price)
}

/// European delta `dV/dS`.
pub fn european_vanilla_delta(
    model: &ModelParams,
    spec: &OptionSpec,
    s0: f64,
    tau: f64,
) -> Result<f64, EuropeanError> {
    european_vanilla_greeks(model, spec, s0, tau).map(|g| g.delta)
}

/// European gamma `d2V/dS2`.
pub fn european_vanilla_gamma(
    model: &ModelParams,
    spec: &OptionSpec,
    s0: f64,
    tau: f64,
) -> Result<f64, EuropeanError> {
    european_vanilla_greeks(model, spec, s0, tau).map(|g| g.gamma)
}

/// European maturity sensitivity `dV/dT`.
pub fn european_vanilla_theta(
    model: &ModelParams,
    spec: &OptionSpec,
    s0: f64,
    tau: f64,
) -> Result<f64, EuropeanError> {
    european_vanilla_greeks(model, spec, s0, tau).map(|g| g.theta)
}
