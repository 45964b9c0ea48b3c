//! Linear system for the logarithmic coefficients `c_{n,1..2n}` of order `n`.

use jumpwave_model::{JumpSpec, ModelParams};

use crate::PerturbationError;

/// Non-central moment `E[Y^k]` of `Y ~ N(m, s2)`.
///
/// Uses the recurrence `M(k) = m M(k-1) + (k-1) s2 M(k-2)` with `M(0) = 1`
/// and `M(1) = m`.
pub fn merton_moment(k: usize, m: f64, s2: f64) -> f64 {
    let (mut prev, mut cur) = (1.0, m);
    if k == 0 {
        return prev;
    }
    for i in 2..=k {
        let next = m * cur + (i - 1) as f64 * s2 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Jump weight `E[Y^l exp(rho Y)]` for a log jump size `Y`.
///
/// Constant jumps give `phi^l exp(rho phi)`. For normal jumps the weight is
/// `exp(rho m + rho^2 s2 / 2) sum_i C(l, i) (rho s2)^(l-i) M(i, m, s2)`, the
/// `l`-th moment of the exponentially tilted law `N(m + rho s2, s2)`. The
/// binomial sum alternates in sign when `rho < 0`, so the tilted moment is
/// evaluated directly by the same recurrence. Without jumps the weight is zero.
pub fn merton_jump_integral(model: &ModelParams, l: usize, rho: f64) -> f64 {
    match model.jump {
        JumpSpec::None => 0.0,
        JumpSpec::Constant { phi } => phi.powi(l as i32) * (rho * phi).exp(),
        JumpSpec::Normal { mu, sigma } => {
            let s2 = sigma * sigma;
            (rho * mu + 0.5 * rho * rho * s2).exp() * merton_moment(l, mu + rho * s2, s2)
        }
    }
}

/// Upper-triangular system `A c = b` for the coefficients `c_{n,1..2n}` at one
/// maturity node.
///
/// Row `j` reads
///
/// ```text
/// j B c_j + j (j+1) sigma^2/2 c_{j+1} + lambda sum_{k > j} C(k, j-1) I_{k-j+1} c_k
///     = r (1 - h) (dc_{n-1,j-1}/dh + drho/dh c_{n-1,j-2})
/// ```
///
/// with `B = sigma^2/2 (2 rho - 1) + r - delta + lambda (I_1 - zeta)` and
/// `I_l` the jump weights of [`merton_jump_integral`].
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientSystem {
    /// Order `n`; the system has `2n` unknowns.
    pub order: usize,
    /// Row-major `2n x 2n` matrix, row and column `i` standing for `c_{i+1}`.
    pub matrix: Vec<Vec<f64>>,
    /// Right-hand side.
    pub rhs: Vec<f64>,
}

impl CoefficientSystem {
    /// Assembles the system of order `n >= 1`.
    ///
    /// `prev_c` and `prev_dc` hold `c_{n-1,0..2n-2}` and their `h`-derivatives.
    #[allow(clippy::too_many_arguments)]
    pub fn assemble(
        model: &ModelParams,
        n: usize,
        h: f64,
        rho: f64,
        d_rho_dh: f64,
        prev_c: &[f64],
        prev_dc: &[f64],
    ) -> Result<Self, PerturbationError> {
        if n == 0 {
            return Err(PerturbationError::InvalidInput(
                "the coefficient system starts at order 1".into(),
            ));
        }
        let width = 2 * n - 1;
        if prev_c.len() != width || prev_dc.len() != width {
            return Err(PerturbationError::PriorOrderMissing { order: n - 1 });
        }
        let size = 2 * n;
        let lambda = model.effective_lambda();
        let s2 = model.sigma * model.sigma;
        let weights: Vec<f64> = (0..=size)
            .map(|l| merton_jump_integral(model, l, rho))
            .collect();
        let lead = 0.5 * s2 * (2.0 * rho - 1.0) + model.r - model.delta
            + lambda * (weights[1] - model.zeta());
        if !(lead.abs() > 1e-12) {
            return Err(PerturbationError::SingularSystem {
                order: n,
                bracket: lead,
            });
        }
        let mut matrix = vec![vec![0.0; size]; size];
        let mut rhs = vec![0.0; size];
        let get = |v: &[f64], j: isize| {
            if j < 0 {
                0.0
            } else {
                v.get(j as usize).copied().unwrap_or(0.0)
            }
        };
        for j in 1..=size {
            let row = &mut matrix[j - 1];
            row[j - 1] = j as f64 * lead;
            if j < size {
                row[j] += (j * (j + 1)) as f64 * 0.5 * s2;
            }
            if lambda > 0.0 {
                for k in j + 1..=size {
                    row[k - 1] += lambda * binomial(k, j - 1) * weights[k - j + 1];
                }
            }
            let ji = j as isize;
            rhs[j - 1] =
                model.r * (1.0 - h) * (get(prev_dc, ji - 1) + d_rho_dh * get(prev_c, ji - 2));
        }
        Ok(Self {
            order: n,
            matrix,
            rhs,
        })
    }

    /// Back-substitution from `c_{2n}` down to `c_1`.
    pub fn solve(&self) -> Vec<f64> {
        let size = self.rhs.len();
        let mut c = vec![0.0; size];
        for i in (0..size).rev() {
            let acc: f64 = (i + 1..size).map(|k| self.matrix[i][k] * c[k]).sum();
            c[i] = (self.rhs[i] - acc) / self.matrix[i][i];
        }
        c
    }
}

/// Coefficients `c_{n,0..2n}` of order `n >= 1` with `c_{n,0}` left at zero.
///
/// The constant term is fixed later by the boundary conditions.
pub fn solve_coefficient_system(
    model: &ModelParams,
    n: usize,
    h: f64,
    rho: f64,
    d_rho_dh: f64,
    prev_c: &[f64],
    prev_dc: &[f64],
) -> Result<Vec<f64>, PerturbationError> {
    let system = CoefficientSystem::assemble(model, n, h, rho, d_rho_dh, prev_c, prev_dc)?;
    let mut out = Vec::with_capacity(2 * n + 1);
    out.push(0.0);
    out.extend(system.solve());
    Ok(out)
}
