use serde::Serialize;

use crate::PerturbationError;

/// Number of nodes of the default maturity grid.
pub const DEFAULT_GRID_NODES: usize = 200;
/// Shortest maturity of the default grid.
///
/// Below a few thousandths of a year the roots `rho` exceed 100 in size and
/// the order-two and order-three boundary equations lose their root next to
/// the lower-order boundary, so the default grid stays above this floor.
pub const DEFAULT_GRID_FLOOR: f64 = 5e-3;

/// Ascending maturities with their time-change values `h = 1 - exp(-rT)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaturityGrid {
    nodes: Vec<f64>,
    h: Vec<f64>,
}

impl MaturityGrid {
    /// Builds a grid from strictly increasing positive maturities.
    pub fn new(nodes: Vec<f64>, r: f64) -> Result<Self, PerturbationError> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(PerturbationError::InvalidInput(format!(
                "the expansion variable h = 1 - exp(-rT) needs r > 0, got {r}"
            )));
        }
        if nodes.is_empty() {
            return Err(PerturbationError::GridTooCoarse {
                nodes: 0,
                required: 1,
            });
        }
        if !(nodes[0] > 0.0)
            || nodes.iter().any(|t| !t.is_finite())
            || nodes.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(PerturbationError::InvalidInput(
                "maturity grid must be finite, positive and strictly increasing".into(),
            ));
        }
        let h = nodes.iter().map(|t| -(-r * t).exp_m1()).collect();
        Ok(Self { nodes, h })
    }

    /// `m` log-spaced nodes on `[t_min, t_max]`.
    pub fn log_spaced(t_min: f64, t_max: f64, m: usize, r: f64) -> Result<Self, PerturbationError> {
        if m < 2 || !(t_min > 0.0 && t_max > t_min) {
            return Err(PerturbationError::InvalidInput(format!(
                "log-spaced grid needs 0 < t_min < t_max and m >= 2, got [{t_min}, {t_max}] with {m}"
            )));
        }
        let (a, b) = (t_min.ln(), t_max.ln());
        let mut nodes: Vec<f64> = (0..m)
            .map(|i| (a + (b - a) * i as f64 / (m - 1) as f64).exp())
            .collect();
        nodes[m - 1] = t_max;
        Self::new(nodes, r)
    }

    /// Default grid: 200 log-spaced nodes on `[max(DEFAULT_GRID_FLOOR, T/1000), T]`,
    /// or on `[T/1000, T]` when `T` itself is below the floor.
    pub fn default_for(t_final: f64, r: f64) -> Result<Self, PerturbationError> {
        let floor = if t_final > 2.0 * DEFAULT_GRID_FLOOR {
            DEFAULT_GRID_FLOOR
        } else {
            0.0
        };
        Self::log_spaced(
            (t_final / 1000.0).max(floor),
            t_final,
            DEFAULT_GRID_NODES,
            r,
        )
    }

    /// Grid that is uniform in `h` around the maturity `center`:
    /// `h_k = h(center) (1 + k * rel_step)` for `k = -half_width..=half_width`.
    ///
    /// Pricing at a single maturity only needs `h`-derivatives at that point, and
    /// a narrow symmetric stencil resolves them far better than a global grid.
    pub fn stencil(
        center: f64,
        r: f64,
        half_width: usize,
        rel_step: f64,
    ) -> Result<Self, PerturbationError> {
        if !(center > 0.0 && center.is_finite()) {
            return Err(PerturbationError::InvalidInput(format!(
                "maturity must be positive, got {center}"
            )));
        }
        if !(r > 0.0 && r.is_finite()) {
            return Err(PerturbationError::InvalidInput(format!(
                "the expansion variable h = 1 - exp(-rT) needs r > 0, got {r}"
            )));
        }
        let hw = half_width as f64;
        if !(rel_step > 0.0 && rel_step * hw < 0.5) {
            return Err(PerturbationError::InvalidInput(format!(
                "stencil step {rel_step} is too wide for half-width {half_width}"
            )));
        }
        let h0 = -(-r * center).exp_m1();
        let dh = rel_step * h0;
        let k = half_width as i64;
        let h: Vec<f64> = (-k..=k).map(|i| h0 + i as f64 * dh).collect();
        if h.last().is_some_and(|&x| x >= 1.0) {
            return Err(PerturbationError::InvalidInput(
                "stencil reaches h >= 1".into(),
            ));
        }
        let mut nodes: Vec<f64> = h.iter().map(|&x| -(-x).ln_1p() / r).collect();
        nodes[half_width] = center;
        let mut h = h;
        h[half_width] = h0;
        Ok(Self { nodes, h })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn h_values(&self) -> &[f64] {
        &self.h
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Derivative in `h` of values sampled on a (possibly non-uniform) grid.
///
/// Second-order three-point formulas: central in the interior, one-sided at
/// both ends. Needs at least three points.
pub fn finite_difference_dh(h: &[f64], values: &[f64]) -> Result<Vec<f64>, PerturbationError> {
    let n = h.len();
    if n < 3 || values.len() != n {
        return Err(PerturbationError::GridTooCoarse {
            nodes: n,
            required: 3,
        });
    }
    let mut out = vec![0.0; n];
    for i in 0..n {
        let (a, b, c, ia) = if i == 0 {
            (h[0], h[1], h[2], 0)
        } else if i == n - 1 {
            (h[n - 3], h[n - 2], h[n - 1], n - 3)
        } else {
            (h[i - 1], h[i], h[i + 1], i - 1)
        };
        let x = h[i];
        // Derivative of the Lagrange interpolant through (a, b, c) at x.
        let wa = ((x - b) + (x - c)) / ((a - b) * (a - c));
        let wb = ((x - a) + (x - c)) / ((b - a) * (b - c));
        let wc = ((x - a) + (x - b)) / ((c - a) * (c - b));
        out[i] = wa * values[ia] + wb * values[ia + 1] + wc * values[ia + 2];
    }
    Ok(out)
}
