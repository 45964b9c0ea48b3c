//! Order-by-order construction of the knock-out premium on a maturity grid.

use jumpwave_european::{european_barrier_greeks, Greeks};
use jumpwave_model::{Branch, ModelParams};
use jumpwave_vanilla::boundary::{closest_approach, find_boundary};
use jumpwave_vanilla::{
    finite_difference_dh, log_power, solve_coefficient_system, MaturityGrid, PerturbationError,
    PerturbationSettings,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::problem::BarrierProblem;

/// Order-`n` data of both power families at one maturity node, for a unit
/// strike.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierNode {
    pub maturity: f64,
    pub h: f64,
    pub rho_plus: f64,
    pub rho_minus: f64,
    pub d_rho_plus_dh: f64,
    pub d_rho_minus_dh: f64,
    /// `c+_{n,0..2n}`.
    pub c_plus: Vec<f64>,
    /// `c-_{n,0..2n}`.
    pub c_minus: Vec<f64>,
    /// `h`-derivatives of `c_plus`, filled by [`compute_barrier_h_derivatives`].
    pub dc_plus_dh: Option<Vec<f64>>,
    /// `h`-derivatives of `c_minus`.
    pub dc_minus_dh: Option<Vec<f64>>,
    /// Logarithmic part of both families at the barrier, `r*_n(h, L)`; the
    /// constant terms cancel it so that the premium vanishes there.
    pub rest: f64,
    /// Exercise boundary of the order-`n` partial sum.
    pub boundary: f64,
    /// False when the boundary equation had no root and the closest approach
    /// was used; smooth pasting still holds but value matching does not.
    pub value_matched: bool,
    /// Function evaluations spent on the boundary.
    pub iterations: usize,
}

impl BarrierNode {
    /// `f_n(x)` and its derivative on the live side of the barrier.
    pub fn term(&self, x: f64) -> (f64, f64) {
        let (p, dp) = log_power(&self.c_plus, self.rho_plus, x);
        let (m, dm) = log_power(&self.c_minus, self.rho_minus, x);
        (p + m, dp + dm)
    }
}

/// All nodes of one order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierOrderCoefficients {
    pub order: usize,
    pub nodes: Vec<BarrierNode>,
}

fn require_black_scholes(model: &ModelParams) -> Result<(), PerturbationError> {
    if model.is_black_scholes() {
        Ok(())
    } else {
        Err(jumpwave_european::EuropeanError::JumpsNotSupported.into())
    }
}

/// Constant terms `(c+_{n,0}, c-_{n,0})` from the barrier condition
/// `f_n(L) = 0` and smooth pasting at `b`, given the logarithmic parts.
///
/// `pasting` is the slope that `f_n` must have at `b`.
fn constant_terms(rho: (f64, f64), level: f64, b: f64, rest: f64, pasting: f64) -> (f64, f64) {
    let a11 = level.powf(rho.0);
    let a12 = level.powf(rho.1);
    let a21 = rho.0 * b.powf(rho.0 - 1.0);
    let a22 = rho.1 * b.powf(rho.1 - 1.0);
    let det = a11 * a22 - a12 * a21;
    (
        (-rest * a22 - a12 * pasting) / det,
        (a11 * pasting + rest * a21) / det,
    )
}

/// Solves order `prior.len()` at node `i` given all lower orders.
fn solve_node(
    model: &ModelParams,
    problem: &BarrierProblem,
    grid: &MaturityGrid,
    i: usize,
    prior: &[BarrierOrderCoefficients],
    settings: &PerturbationSettings,
) -> Result<BarrierNode, PerturbationError> {
    let n = prior.len();
    let t = grid.nodes()[i];
    let h = grid.h_values()[i];
    let (rho_plus, rho_minus, d_plus, d_minus) = match prior.first() {
        Some(p0) => {
            let node = &p0.nodes[i];
            (
                node.rho_plus,
                node.rho_minus,
                node.d_rho_plus_dh,
                node.d_rho_minus_dh,
            )
        }
        None => {
            let rp = model.inverse_root(model.r / h, Branch::Positive)?;
            let rm = model.inverse_root(model.r / h, Branch::Negative)?;
            (rp, rm, model.d_rho_dh(h, rp)?, model.d_rho_dh(h, rm)?)
        }
    };
    let (mut c_plus, mut c_minus) = if n == 0 {
        (vec![0.0], vec![0.0])
    } else {
        let last = &prior[n - 1].nodes[i];
        let missing = PerturbationError::PriorOrderMissing { order: n - 1 };
        let dp = last.dc_plus_dh.as_ref().ok_or(missing.clone())?;
        let dm = last.dc_minus_dh.as_ref().ok_or(missing)?;
        (
            solve_coefficient_system(model, n, h, rho_plus, d_plus, &last.c_plus, dp)?,
            solve_coefficient_system(model, n, h, rho_minus, d_minus, &last.c_minus, dm)?,
        )
    };
    let level = problem.level;
    let rest = log_power(&c_plus, rho_plus, level).0 + log_power(&c_minus, rho_minus, level).0;
    let spec = problem.unit_spec(t)?;
    let barrier = problem.unit_barrier();
    let s = problem.sign();
    let lower: Vec<&BarrierNode> = prior.iter().map(|o| &o.nodes[i]).collect();

    let evaluate =
        |b: f64, c_plus: &[f64], c_minus: &[f64]| -> Result<(f64, f64, f64), PerturbationError> {
            let e: Greeks = european_barrier_greeks(model, &spec, &barrier, b, t)?;
            let (f_prev, df_prev) = lower
                .iter()
                .map(|node| node.term(b))
                .fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
            let (lp, dlp) = log_power(c_plus, rho_plus, b);
            let (lm, dlm) = log_power(c_minus, rho_minus, b);
            let pasting = (s - e.delta) / h - df_prev - dlp - dlm;
            let (c0p, c0m) = constant_terms((rho_plus, rho_minus), level, b, rest, pasting);
            let f_n = lp + lm + c0p * b.powf(rho_plus) + c0m * b.powf(rho_minus);
            let residual = h * (f_prev + f_n) - (s * (b - 1.0) - e.price);
            Ok((c0p, c0m, residual))
        };

    let mut failure = None;
    let start = prior.last().map(|o| o.nodes[i].boundary);
    let scan = problem.scan(start, settings.boundary_xtol);
    let mut residual = |b: f64| match evaluate(b, &c_plus, &c_minus) {
        Ok((_, _, r)) => r,
        Err(e) => {
            failure.get_or_insert(e);
            f64::NAN
        }
    };
    let mut root = find_boundary(&mut residual, &scan);
    let value_matched = root.is_some();
    if root.is_none() && settings.tangent_fallback {
        root = closest_approach(&mut residual, &scan);
    }
    if let Some(e) = failure {
        return Err(e);
    }
    let root = root.ok_or(PerturbationError::BoundaryNotBracketed {
        order: n,
        maturity: t,
    })?;
    let (c0p, c0m, _) = evaluate(root.x, &c_plus, &c_minus)?;
    c_plus[0] = c0p;
    c_minus[0] = c0m;
    Ok(BarrierNode {
        maturity: t,
        h,
        rho_plus,
        rho_minus,
        d_rho_plus_dh: d_plus,
        d_rho_minus_dh: d_minus,
        c_plus,
        c_minus,
        dc_plus_dh: None,
        dc_minus_dh: None,
        rest,
        boundary: root.x,
        value_matched,
        iterations: root.iterations,
    })
}

fn solve_order(
    model: &ModelParams,
    problem: &BarrierProblem,
    grid: &MaturityGrid,
    prior: &[BarrierOrderCoefficients],
    settings: &PerturbationSettings,
) -> Result<BarrierOrderCoefficients, PerturbationError> {
    require_black_scholes(model)?;
    if let Some(bad) = prior
        .iter()
        .enumerate()
        .find(|(k, o)| o.order != *k || o.nodes.len() != grid.len())
    {
        return Err(PerturbationError::PriorOrderMissing { order: bad.0 });
    }
    let nodes = (0..grid.len())
        .into_par_iter()
        .map(|i| solve_node(model, problem, grid, i, prior, settings))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(BarrierOrderCoefficients {
        order: prior.len(),
        nodes,
    })
}

/// Order zero: `f_0 = c+ x^rho+ + c- x^rho-` with `f_0(L) = 0`, so that
/// `c- = -L^(rho+ - rho-) c+`, and the boundary from value matching and smooth
/// pasting, independently at every node.
pub fn solve_barrier_order0(
    model: &ModelParams,
    problem: &BarrierProblem,
    grid: &MaturityGrid,
    settings: &PerturbationSettings,
) -> Result<BarrierOrderCoefficients, PerturbationError> {
    solve_order(model, problem, grid, &[], settings)
}

/// Order `n = prior.len() >= 1`, given orders `0..n` with their `h`-derivatives.
///
/// Each family's logarithmic coefficients solve the vanilla triangular system
/// with its own root. The constant terms cancel the rest term at the barrier
/// and satisfy smooth pasting; substituting them into value matching leaves
/// one scalar equation for the boundary.
pub fn solve_barrier_ordern(
    model: &ModelParams,
    problem: &BarrierProblem,
    grid: &MaturityGrid,
    prior: &[BarrierOrderCoefficients],
    settings: &PerturbationSettings,
) -> Result<BarrierOrderCoefficients, PerturbationError> {
    if prior.is_empty() {
        return Err(PerturbationError::PriorOrderMissing { order: 0 });
    }
    solve_order(model, problem, grid, prior, settings)
}

/// Maturity sensitivities of the order-zero knock-out solution at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierOrder0Sensitivities {
    /// `d b_0 / dT` for a unit strike.
    pub d_boundary_dt: f64,
    /// `d c+_{0,0} / dh`.
    pub d_c_plus_dh: f64,
    /// `d c-_{0,0} / dh`.
    pub d_c_minus_dh: f64,
}

/// Gaussian elimination with partial pivoting for a 3x3 system.
fn solve3(mut a: [[f64; 3]; 3], mut y: [f64; 3]) -> [f64; 3] {
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
            .unwrap_or(col);
        a.swap(col, pivot);
        y.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            y[row] -= f * y[col];
        }
    }
    let mut x = [0.0; 3];
    for i in (0..3).rev() {
        let acc: f64 = (i + 1..3).map(|k| a[i][k] * x[k]).sum();
        x[i] = (y[i] - acc) / a[i][i];
    }
    x
}

/// Closed-form maturity sensitivities of the order-zero solution.
///
/// Order zero is the root `(c+, c-, b)` of the barrier condition
/// `c+ L^rho+ + c- L^rho- = 0`, smooth pasting
/// `h (c+ rho+ b^(rho+ - 1) + c- rho- b^(rho- - 1)) = s - Delta` and value
/// matching `h (c+ b^rho+ + c- b^rho-) = s (b - 1) - V`, with `V`, `Delta` the
/// European knock-out price and delta at `b`. Differentiating all three in
/// `T` gives a linear system for the derivatives; smooth pasting removes the
/// `b`-derivative from the value-matching row.
pub fn barrier_order0_sensitivities(
    model: &ModelParams,
    problem: &BarrierProblem,
    node: &BarrierNode,
) -> Result<BarrierOrder0Sensitivities, PerturbationError> {
    let (t, h, b, l) = (node.maturity, node.h, node.boundary, problem.level);
    let (p, m) = (node.rho_plus, node.rho_minus);
    let (cp, cm) = (node.c_plus[0], node.c_minus[0]);
    let g: Greeks =
        european_barrier_greeks(model, &problem.unit_spec(t)?, &problem.unit_barrier(), b, t)?;
    let dh_dt = model.r * (1.0 - h);
    let (p_t, m_t) = (node.d_rho_plus_dh * dh_dt, node.d_rho_minus_dh * dh_dt);
    let (ll, lb) = (l.ln(), b.ln());
    let (lp, lm) = (l.powf(p), l.powf(m));
    let (bp, bm) = (b.powf(p), b.powf(m));
    let (sp, sm) = (p * bp / b, m * bm / b);
    let curvature = cp * p * (p - 1.0) * bp / (b * b) + cm * m * (m - 1.0) * bm / (b * b);
    let jacobian = [
        [lp, lm, 0.0],
        [h * sp, h * sm, h * curvature + g.gamma],
        [h * bp, h * bm, 0.0],
    ];
    let f_t = [
        ll * (cp * lp * p_t + cm * lm * m_t),
        dh_dt * (cp * sp + cm * sm)
            + h * (cp * p_t * bp / b * (1.0 + p * lb) + cm * m_t * bm / b * (1.0 + m * lb))
            + g.delta_theta,
        dh_dt * (cp * bp + cm * bm) + h * lb * (cp * p_t * bp + cm * m_t * bm) + g.theta,
    ];
    let d = solve3(jacobian, f_t.map(|v| -v));
    Ok(BarrierOrder0Sensitivities {
        d_boundary_dt: d[2],
        d_c_plus_dh: d[0] / dh_dt,
        d_c_minus_dh: d[1] / dh_dt,
    })
}

/// Fills the `h`-derivatives of both families.
///
/// Order zero uses [`barrier_order0_sensitivities`] when
/// `settings.analytic_order0` is set; everything else uses three-point
/// differences in `h`.
pub fn compute_barrier_h_derivatives(
    model: &ModelParams,
    problem: &BarrierProblem,
    grid: &MaturityGrid,
    coefficients: &mut BarrierOrderCoefficients,
    settings: &PerturbationSettings,
) -> Result<(), PerturbationError> {
    if coefficients.nodes.len() != grid.len() {
        return Err(PerturbationError::PriorOrderMissing {
            order: coefficients.order,
        });
    }
    if coefficients.order == 0 && settings.analytic_order0 {
        let d: Vec<BarrierOrder0Sensitivities> = coefficients
            .nodes
            .par_iter()
            .map(|node| barrier_order0_sensitivities(model, problem, node))
            .collect::<Result<_, _>>()?;
        for (node, d) in coefficients.nodes.iter_mut().zip(d) {
            node.dc_plus_dh = Some(vec![d.d_c_plus_dh]);
            node.dc_minus_dh = Some(vec![d.d_c_minus_dh]);
        }
        return Ok(());
    }
    let width = 2 * coefficients.order + 1;
    let column =
        |pick: fn(&BarrierNode) -> &Vec<f64>, j: usize| -> Result<Vec<f64>, PerturbationError> {
            let values: Vec<f64> = coefficients
                .nodes
                .iter()
                .map(|node| pick(node)[j])
                .collect();
            finite_difference_dh(grid.h_values(), &values)
        };
    let plus: Vec<Vec<f64>> = (0..width)
        .map(|j| column(|n| &n.c_plus, j))
        .collect::<Result<_, _>>()?;
    let minus: Vec<Vec<f64>> = (0..width)
        .map(|j| column(|n| &n.c_minus, j))
        .collect::<Result<_, _>>()?;
    for (i, node) in coefficients.nodes.iter_mut().enumerate() {
        node.dc_plus_dh = Some(plus.iter().map(|col| col[i]).collect());
        node.dc_minus_dh = Some(minus.iter().map(|col| col[i]).collect());
    }
    Ok(())
}

/// Orders `0..=N` of a knock-out premium solved on a maturity grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierSolution {
    pub model: ModelParams,
    pub problem: BarrierProblem,
    pub grid: MaturityGrid,
    pub orders: Vec<BarrierOrderCoefficients>,
}

impl BarrierSolution {
    /// Solves orders `0..=max_order`, differencing in `h` between orders.
    pub fn solve(
        model: &ModelParams,
        problem: &BarrierProblem,
        grid: MaturityGrid,
        max_order: usize,
        settings: &PerturbationSettings,
    ) -> Result<Self, PerturbationError> {
        model.validate()?;
        let mut orders: Vec<BarrierOrderCoefficients> = Vec::with_capacity(max_order + 1);
        for n in 0..=max_order {
            let mut next = solve_order(model, problem, &grid, &orders, settings)?;
            if n < max_order {
                compute_barrier_h_derivatives(model, problem, &grid, &mut next, settings)?;
            }
            orders.push(next);
        }
        Ok(Self {
            model: *model,
            problem: *problem,
            grid,
            orders,
        })
    }

    /// Highest order available.
    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    /// Boundary of the order-`order` partial sum at node `node`, in currency.
    pub fn boundary(&self, node: usize, order: usize) -> f64 {
        self.problem.strike * self.orders[order].nodes[node].boundary
    }

    fn partial_sum(&self, node: usize, order: usize, x: f64) -> (f64, f64) {
        if self.problem.knocked_out(x) {
            return (0.0, 0.0);
        }
        self.orders[..=order]
            .iter()
            .map(|o| o.nodes[node].term(x))
            .fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1))
    }

    /// Premium `h F_N(h, S/K)` in currency; zero on the knocked-out side.
    pub fn premium(&self, node: usize, order: usize, spot: f64) -> f64 {
        let h = self.grid.h_values()[node];
        self.problem.strike * h * self.partial_sum(node, order, spot / self.problem.strike).0
    }

    /// Spot derivative of [`Self::premium`].
    pub fn premium_dx(&self, node: usize, order: usize, spot: f64) -> f64 {
        let h = self.grid.h_values()[node];
        h * self.partial_sum(node, order, spot / self.problem.strike).1
    }

    /// Premium of the live-side formula evaluated at the barrier itself, in
    /// currency. It vanishes up to rounding for every order.
    pub fn premium_at_barrier(&self, node: usize, order: usize) -> f64 {
        let h = self.grid.h_values()[node];
        let l = self.problem.level;
        let f: f64 = self.orders[..=order]
            .iter()
            .map(|o| o.nodes[node].term(l).0)
            .sum();
        self.problem.strike * h * f
    }

    fn european_at_boundary(
        &self,
        node: usize,
        order: usize,
    ) -> Result<(f64, Greeks), PerturbationError> {
        let t = self.grid.nodes()[node];
        let b = self.orders[order].nodes[node].boundary;
        let g = european_barrier_greeks(
            &self.model,
            &self.problem.unit_spec(t)?,
            &self.problem.unit_barrier(),
            b,
            t,
        )?;
        Ok((b * self.problem.strike, g))
    }

    /// `|h F_N(b) - (s (b - K) - V_E(b))|` in currency.
    pub fn value_matching_residual(
        &self,
        node: usize,
        order: usize,
    ) -> Result<f64, PerturbationError> {
        let (b, e) = self.european_at_boundary(node, order)?;
        let k = self.problem.strike;
        let s = self.problem.sign();
        Ok((self.premium(node, order, b) - (s * (b - k) - k * e.price)).abs())
    }

    /// `|h dF_N/dx(b) - (s - Delta_E(b))|`.
    pub fn smooth_pasting_residual(
        &self,
        node: usize,
        order: usize,
    ) -> Result<f64, PerturbationError> {
        let (b, e) = self.european_at_boundary(node, order)?;
        Ok((self.premium_dx(node, order, b) - (self.problem.sign() - e.delta)).abs())
    }

    /// False when the order-`order` boundary at `node` is a closest approach
    /// rather than a root of the boundary equation.
    pub fn value_matched(&self, node: usize, order: usize) -> bool {
        self.orders[order].nodes[node].value_matched
    }

    /// Total boundary-search evaluations across all orders and nodes.
    pub fn iterations(&self) -> usize {
        self.orders
            .iter()
            .flat_map(|o| &o.nodes)
            .map(|n| n.iterations)
            .sum()
    }
}
