use serde::{Deserialize, Serialize};

use crate::ModelError;

const ROOT_RTOL: f64 = 1e-12;
const ROOT_MAX_ITER: usize = 200;
const SLOPE_FLOOR: f64 = 1e-14;

/// Law of the log-jump size `J`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum JumpSpec {
    /// Pure diffusion. Equivalent to `Constant { phi: 0 }` or a zero intensity.
    None,
    /// Every jump multiplies the asset by `exp(phi)`.
    Constant { phi: f64 },
    /// Merton log-jumps `J ~ N(mu, sigma^2)`.
    Normal { mu: f64, sigma: f64 },
}

/// Branch selector for the inverse of the Laplace exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Positive,
    Negative,
}

/// Market and dynamics parameters of one pricing problem.
///
/// Rates are continuously compounded per year. The drift of the log-price is
/// fixed by the martingale condition, so `Phi(1) = r - delta` for every jump law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Risk-free rate.
    pub r: f64,
    /// Continuous dividend yield.
    pub delta: f64,
    /// Diffusion volatility.
    pub sigma: f64,
    /// Poisson jump intensity.
    pub lambda: f64,
    /// Log-jump law.
    pub jump: JumpSpec,
}

impl ModelParams {
    /// Builds and validates a parameter set.
    pub fn new(
        r: f64,
        delta: f64,
        sigma: f64,
        lambda: f64,
        jump: JumpSpec,
    ) -> Result<Self, ModelError> {
        let m = Self {
            r,
            delta,
            sigma,
            lambda,
            jump,
        };
        m.validate()?;
        Ok(m)
    }

    /// Black & Scholes dynamics.
    pub fn black_scholes(r: f64, delta: f64, sigma: f64) -> Result<Self, ModelError> {
        Self::new(r, delta, sigma, 0.0, JumpSpec::None)
    }

    /// Constant log-jump dynamics.
    pub fn constant_jump(
        r: f64,
        delta: f64,
        sigma: f64,
        lambda: f64,
        phi: f64,
    ) -> Result<Self, ModelError> {
        Self::new(r, delta, sigma, lambda, JumpSpec::Constant { phi })
    }

    /// Merton jump-diffusion dynamics.
    pub fn merton(
        r: f64,
        delta: f64,
        sigma: f64,
        lambda: f64,
        mu: f64,
        sigma_jump: f64,
    ) -> Result<Self, ModelError> {
        Self::new(
            r,
            delta,
            sigma,
            lambda,
            JumpSpec::Normal {
                mu,
                sigma: sigma_jump,
            },
        )
    }

    /// Checks the admissible ranges of all fields.
    pub fn validate(&self) -> Result<(), ModelError> {
        let check = |name, value: f64, ok: bool, reason| {
            if value.is_finite() && ok {
                Ok(())
            } else {
                Err(ModelError::InvalidParameter {
                    name,
                    value,
                    reason,
                })
            }
        };
        check(
            "r",
            self.r,
            self.r >= 0.0,
            "must be finite and non-negative",
        )?;
        check("delta", self.delta, true, "must be finite")?;
        check(
            "sigma",
            self.sigma,
            self.sigma > 0.0,
            "must be finite and positive",
        )?;
        check(
            "lambda",
            self.lambda,
            self.lambda >= 0.0,
            "must be finite and non-negative",
        )?;
        match self.jump {
            JumpSpec::None => Ok(()),
            JumpSpec::Constant { phi } => check("phi", phi, true, "must be finite"),
            JumpSpec::Normal { mu, sigma } => {
                check("mu", mu, true, "must be finite")?;
                check(
                    "sigma_jump",
                    sigma,
                    sigma > 0.0,
                    "must be finite and positive",
                )
            }
        }
    }

    /// Mean of the log-jump, zero for pure diffusion.
    pub fn jump_log_mean(&self) -> f64 {
        match self.jump {
            JumpSpec::None => 0.0,
            JumpSpec::Constant { phi } => phi,
            JumpSpec::Normal { mu, .. } => mu,
        }
    }

    /// Variance of the log-jump, zero unless the jumps are normal.
    pub fn jump_log_variance(&self) -> f64 {
        match self.jump {
            JumpSpec::Normal { sigma, .. } => sigma * sigma,
            _ => 0.0,
        }
    }

    /// Intensity that actually drives the dynamics: zero when there is no jump
    /// law or every jump has size zero.
    pub fn effective_lambda(&self) -> f64 {
        match self.jump {
            JumpSpec::None | JumpSpec::Constant { phi: 0.0 } => 0.0,
            _ => self.lambda,
        }
    }

    /// True when the model reduces to Black & Scholes.
    pub fn is_black_scholes(&self) -> bool {
        self.effective_lambda() == 0.0
    }

    /// Moment generating function of one log-jump, `E[exp(theta J)]`.
    pub fn jump_mgf(&self, theta: f64) -> f64 {
        let m = self.jump_log_mean();
        let s2 = self.jump_log_variance();
        (theta * m + 0.5 * theta * theta * s2).exp()
    }

    /// Expected relative jump size `zeta = E[exp(J) - 1]`.
    pub fn zeta(&self) -> f64 {
        match self.jump {
            JumpSpec::None => 0.0,
            JumpSpec::Constant { phi } => phi.exp_m1(),
            JumpSpec::Normal { mu, sigma } => (mu + 0.5 * sigma * sigma).exp_m1(),
        }
    }

    /// Drift of the log-price, `r - delta - lambda*zeta - sigma^2/2`.
    pub fn log_drift(&self) -> f64 {
        self.r - self.delta - self.effective_lambda() * self.zeta() - 0.5 * self.sigma * self.sigma
    }

    /// Laplace exponent `Phi(theta)`.
    pub fn laplace_exponent(&self, theta: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let mut phi = self.log_drift() * theta + 0.5 * s2 * theta * theta;
        let lam = self.effective_lambda();
        if lam > 0.0 {
            let m = self.jump_log_mean();
            let v = self.jump_log_variance();
            phi += lam * (theta * m + 0.5 * theta * theta * v).exp_m1();
        }
        phi
    }

    /// First derivative `Phi'(theta)`.
    pub fn laplace_exponent_derivative(&self, theta: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let mut d = self.log_drift() + s2 * theta;
        let lam = self.effective_lambda();
        if lam > 0.0 {
            let m = self.jump_log_mean();
            let v = self.jump_log_variance();
            d += lam * (m + theta * v) * self.jump_mgf(theta);
        }
        d
    }

    /// Second derivative `Phi''(theta)`, strictly positive.
    pub fn laplace_exponent_second_derivative(&self, theta: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        let lam = self.effective_lambda();
        if lam == 0.0 {
            return s2;
        }
        let m = self.jump_log_mean();
        let v = self.jump_log_variance();
        let a = m + theta * v;
        s2 + lam * (a * a + v) * self.jump_mgf(theta)
    }

    /// Solves `Phi(theta) = y` on the requested branch.
    ///
    /// `Phi` is convex with `Phi(0) = 0`, so for `y > 0` there is exactly one
    /// root on each side of the origin. A bracket `[0, theta_hi]` (or its mirror)
    /// is grown by doubling and a Newton iteration runs inside it, falling back
    /// to bisection whenever a step would leave the bracket.
    pub fn inverse_root(&self, y: f64, branch: Branch) -> Result<f64, ModelError> {
        if !(y > 0.0) {
            return Err(ModelError::NonPositiveTarget(y));
        }
        let dir = match branch {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        };
        let g = |t: f64| self.laplace_exponent(t) - y;

        // Outer end of the bracket: g < 0 at the origin, g > 0 out there.
        let mut outer = dir;
        let mut g_outer = g(outer);
        let mut doublings = 0;
        while g_outer <= 0.0 {
            outer *= 2.0;
            g_outer = g(outer);
            doublings += 1;
            if doublings > 1100 || !g_outer.is_finite() {
                return Err(ModelError::NoConvergence {
                    target: y,
                    iterations: doublings,
                });
            }
        }
        // Inner end can move up to the last point known to be below target.
        let mut inner = if doublings == 0 { 0.0 } else { outer / 2.0 };

        // Newton from the outer end converges monotonically for a convex g,
        // the bracket only guards against round-off.
        let mut t = outer;
        let mut gt = g_outer;
        for iter in 1..=ROOT_MAX_ITER {
            if gt.abs() <= ROOT_RTOL * y {
                return Ok(t);
            }
            if gt > 0.0 {
                outer = t;
            } else {
                inner = t;
            }
            let slope = self.laplace_exponent_derivative(t);
            let newton = t - gt / slope;
            let (lo, hi) = if inner < outer {
                (inner, outer)
            } else {
                (outer, inner)
            };
            t = if slope != 0.0 && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (inner + outer)
            };
            gt = g(t);
            if (hi - lo) <= 4.0 * f64::EPSILON * t.abs().max(1.0) && iter > 2 {
                return Ok(t);
            }
        }
        Err(ModelError::NoConvergence {
            target: y,
            iterations: ROOT_MAX_ITER,
        })
    }

    /// Sensitivity of a root `rho = Phi^{-1}(r / h)` to `h`.
    ///
    /// Differentiating `Phi(rho(h)) = r / h` gives `Phi'(rho) d_h rho = -r / h^2`.
    pub fn d_rho_dh(&self, h: f64, rho: f64) -> Result<f64, ModelError> {
        let slope = self.laplace_exponent_derivative(rho);
        if slope.abs() < SLOPE_FLOOR {
            return Err(ModelError::DegenerateSlope { rho });
        }
        Ok(-self.r / (h * h * slope))
    }
}
