//! Undiscounted Black payoffs in forward and total-variance coordinates.

use jumpwave_model::numerics::{norm_cdf, norm_pdf};

/// Black kernel `X N(d1) - K N(d2)` with `d1,2 = (ln(X/K) +- Sigma^2 T / 2) / (Sigma sqrt(T))`.
pub fn bs_kernel(x: f64, sigma: f64, t: f64, k: f64) -> f64 {
    BlackPartials::new(Payoff::Call, x, sigma * sigma * t, k).value
}

/// Payoff families priced by [`BlackPartials`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Payoff {
    Call,
    Put,
    /// Pays one unit when the terminal value ends above the strike.
    DigitalCall,
    /// Pays one unit when the terminal value ends below the strike.
    DigitalPut,
}

/// Undiscounted Black value `B(F, v)` of a payoff on a lognormal terminal value
/// with forward `F` and total variance `v`, and its partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlackPartials {
    pub value: f64,
    /// `dB/dF`
    pub d_f: f64,
    /// `d2B/dF2`
    pub d_ff: f64,
    /// `dB/dv`
    pub d_v: f64,
    /// `d2B/dF dv`
    pub d_fv: f64,
}

impl BlackPartials {
    pub(crate) fn new(payoff: Payoff, f: f64, v: f64, k: f64) -> Self {
        if f <= 0.0 || v <= 0.0 {
            return Self::degenerate(payoff, f, k);
        }
        let sv = v.sqrt();
        let d1 = ((f / k).ln() + 0.5 * v) / sv;
        let d2 = d1 - sv;
        match payoff {
            Payoff::Call | Payoff::Put => {
                let pdf = norm_pdf(d1);
                let d_ff = pdf / (f * sv);
                let d_v = 0.5 * f * pdf / sv;
                let d_fv = -pdf * d2 / (2.0 * v);
                if payoff == Payoff::Call {
                    Self {
                        value: f * norm_cdf(d1) - k * norm_cdf(d2),
                        d_f: norm_cdf(d1),
                        d_ff,
                        d_v,
                        d_fv,
                    }
                } else {
                    Self {
                        value: k * norm_cdf(-d2) - f * norm_cdf(-d1),
                        d_f: -norm_cdf(-d1),
                        d_ff,
                        d_v,
                        d_fv,
                    }
                }
            }
            Payoff::DigitalCall | Payoff::DigitalPut => {
                let pdf = norm_pdf(d2);
                let s = if payoff == Payoff::DigitalPut {
                    1.0
                } else {
                    -1.0
                };
                let value = if payoff == Payoff::DigitalPut {
                    norm_cdf(-d2)
                } else {
                    norm_cdf(d2)
                };
                Self {
                    value,
                    d_f: -s * pdf / (f * sv),
                    d_ff: s * pdf * (d2 / sv + 1.0) / (f * f * sv),
                    d_v: s * pdf * d1 / (2.0 * v),
                    d_fv: s * pdf * (1.0 - d1 * d2) / (2.0 * f * v * sv),
                }
            }
        }
    }

    /// Zero-variance or zero-forward limit: the payoff evaluated at the forward.
    fn degenerate(payoff: Payoff, f: f64, k: f64) -> Self {
        let (value, d_f) = match payoff {
            Payoff::Call => ((f - k).max(0.0), if f > k { 1.0 } else { 0.0 }),
            Payoff::Put => ((k - f).max(0.0), if f < k { -1.0 } else { 0.0 }),
            Payoff::DigitalCall => (if f > k { 1.0 } else { 0.0 }, 0.0),
            Payoff::DigitalPut => (if f < k { 1.0 } else { 0.0 }, 0.0),
        };
        Self {
            value,
            d_f,
            d_ff: 0.0,
            d_v: 0.0,
            d_fv: 0.0,
        }
    }
}
