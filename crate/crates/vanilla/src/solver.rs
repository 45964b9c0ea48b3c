//! Order-by-order construction of the premium on a maturity grid.

use jumpwave_european::{european_vanilla_greeks, Greeks, OptionSpec, Side};
use jumpwave_model::{Branch, ModelParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::boundary::{closest_approach, find_boundary, BracketScan};
use crate::grid::{finite_difference_dh, MaturityGrid};
use crate::system::solve_coefficient_system;
use crate::PerturbationError;

/// Candidate boundaries never leave `(0, 50 K)`.
const CALL_UPPER_LIMIT: f64 = 50.0;
const PUT_LOWER_LIMIT: f64 = 1e-6;
/// Distance kept from the strike, where the premium equations degenerate.
const STRIKE_MARGIN: f64 = 1e-9;

/// Numerical knobs of the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationSettings {
    /// Spacing of the pricing stencil relative to `h(T)`.
    pub stencil_step: f64,
    /// Use the closed-form `h`-derivative of `c_{0,0}` instead of differences.
    pub analytic_order0: bool,
    /// Absolute tolerance on the boundary for a unit strike.
    pub boundary_xtol: f64,
    /// When a boundary equation has no sign change, use the point where its
    /// residual comes closest to zero instead of failing. The node is then
    /// marked as not value-matched.
    pub tangent_fallback: bool,
}

impl Default for PerturbationSettings {
    fn default() -> Self {
        Self {
            stencil_step: 5e-3,
            analytic_order0: true,
            boundary_xtol: 1e-13,
            tangent_fallback: true,
        }
    }
}

/// Whether early exercise can carry any value at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PremiumRegime {
    /// American and European prices coincide.
    Zero,
    NonTrivial,
}

/// Calls on assets without a positive dividend yield are never exercised
/// early; neither are puts when the rate is not positive.
pub fn trivial_premium_check(model: &ModelParams, spec: &OptionSpec) -> PremiumRegime {
    let zero = match spec.side {
        Side::Call => model.delta <= 0.0,
        Side::Put => model.r <= 0.0,
    };
    if zero {
        PremiumRegime::Zero
    } else {
        PremiumRegime::NonTrivial
    }
}

/// `P(l) = sum_j c_j l^j` and `P'(l)` by Horner's scheme.
pub fn log_polynomial(c: &[f64], l: f64) -> (f64, f64) {
    let (mut p, mut dp) = (0.0, 0.0);
    for &cj in c.iter().rev() {
        dp = dp * l + p;
        p = p * l + cj;
    }
    (p, dp)
}

/// Value and spot derivative of `P(ln x) x^rho` with `P(l) = sum_j c_j l^j`.
pub fn log_power(c: &[f64], rho: f64, x: f64) -> (f64, f64) {
    let (p, dp) = log_polynomial(c, x.ln());
    let xr = x.powf(rho);
    (p * xr, (rho * p + dp) * xr / x)
}

/// Order-`n` data at one maturity node, for a unit strike.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeCoefficients {
    pub maturity: f64,
    pub h: f64,
    /// Power exponent, `rho+` for calls and `rho-` for puts.
    pub rho: f64,
    pub d_rho_dh: f64,
    /// `c_{n,0..2n}`.
    pub c: Vec<f64>,
    /// `h`-derivatives of `c`, filled by [`compute_h_derivatives`].
    pub dc_dh: Option<Vec<f64>>,
    /// Exercise boundary of the order-`n` partial sum.
    pub boundary: f64,
    /// False when the boundary equation had no root and the closest approach
    /// was used; smooth pasting still holds but value matching does not.
    pub value_matched: bool,
    /// Function evaluations spent on the boundary.
    pub iterations: usize,
}

impl NodeCoefficients {
    /// `f_n(x)` and its derivative in `x`.
    pub fn term(&self, x: f64) -> (f64, f64) {
        log_power(&self.c, self.rho, x)
    }
}

/// All nodes of one order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderCoefficients {
    pub order: usize,
    pub nodes: Vec<NodeCoefficients>,
}

/// Maturity sensitivities of the order-zero solution at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Order0Sensitivities {
    /// `d b_0 / dT` for a unit strike.
    pub d_boundary_dt: f64,
    /// `d c_{0,0} / dh`.
    pub d_c00_dh: f64,
}

fn unit_spec(side: Side, maturity: f64) -> Result<OptionSpec, PerturbationError> {
    Ok(OptionSpec::new(side, 1.0, maturity)?)
}

fn branch(side: Side) -> Branch {
    match side {
        Side::Call => Branch::Positive,
        Side::Put => Branch::Negative,
    }
}

/// Window and start of the boundary search for a unit strike.
fn scan_for(side: Side, start: Option<f64>, xtol: f64) -> BracketScan {
    let (lower, upper) = match side {
        Side::Call => (1.0 + STRIKE_MARGIN, CALL_UPPER_LIMIT),
        Side::Put => (PUT_LOWER_LIMIT, 1.0 - STRIKE_MARGIN),
    };
    let default_start = match side {
        Side::Call => lower,
        Side::Put => upper,
    };
    BracketScan::new(start.unwrap_or(default_start), lower, upper, xtol)
}

/// Solves order `prior.len()` at node `i` given all lower orders.
fn solve_node(
    model: &ModelParams,
    side: Side,
    grid: &MaturityGrid,
    i: usize,
    prior: &[OrderCoefficients],
    settings: &PerturbationSettings,
) -> Result<NodeCoefficients, PerturbationError> {
    let n = prior.len();
    let t = grid.nodes()[i];
    let h = grid.h_values()[i];
    let (rho, d_rho_dh) = match prior.first() {
        Some(p0) => (p0.nodes[i].rho, p0.nodes[i].d_rho_dh),
        None => {
            let rho = model.inverse_root(model.r / h, branch(side))?;
            (rho, model.d_rho_dh(h, rho)?)
        }
    };
    let mut c = if n == 0 {
        vec![0.0]
    } else {
        let last = &prior[n - 1].nodes[i];
        let dc = last
            .dc_dh
            .as_ref()
            .ok_or(PerturbationError::PriorOrderMissing { order: n - 1 })?;
        solve_coefficient_system(model, n, h, rho, d_rho_dh, &last.c, dc)?
    };
    let spec = unit_spec(side, t)?;
    let s = side.sign();
    let lower: Vec<&NodeCoefficients> = prior.iter().map(|o| &o.nodes[i]).collect();

    // Constant term from smooth pasting and the value-matching residual, both
    // as functions of the candidate boundary.
    let evaluate = |b: f64, c: &[f64]| -> Result<(f64, f64), PerturbationError> {
        let e = european_vanilla_greeks(model, &spec, b, t)?;
        let (f_prev, df_prev) = lower
            .iter()
            .map(|node| node.term(b))
            .fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1));
        // Logarithmic part of f_n at b, its constant term excluded.
        let (p, dp) = log_polynomial(&c[1..], b.ln());
        let (p, dp) = (p * b.ln(), p + dp * b.ln());
        let c0 = b.powf(1.0 - rho) * (s - e.delta - h * df_prev) / (h * rho) - p - dp / rho;
        let f_n = (c0 + p) * b.powf(rho);
        let residual = h * (f_prev + f_n) - (s * (b - 1.0) - e.price);
        Ok((c0, residual))
    };

    let mut failure = None;
    let start = prior.last().map(|o| o.nodes[i].boundary);
    let scan = scan_for(side, start, settings.boundary_xtol);
    let mut residual = |b: f64| match evaluate(b, &c) {
        Ok((_, r)) => r,
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
    c[0] = evaluate(root.x, &c)?.0;
    Ok(NodeCoefficients {
        maturity: t,
        h,
        rho,
        d_rho_dh,
        c,
        dc_dh: None,
        boundary: root.x,
        value_matched,
        iterations: root.iterations,
    })
}

fn solve_order(
    model: &ModelParams,
    spec: &OptionSpec,
    grid: &MaturityGrid,
    prior: &[OrderCoefficients],
    settings: &PerturbationSettings,
) -> Result<OrderCoefficients, PerturbationError> {
    if trivial_premium_check(model, spec) == PremiumRegime::Zero {
        return Err(PerturbationError::InvalidInput(
            "the early exercise premium vanishes identically for this contract".into(),
        ));
    }
    let n = prior.len();
    if let Some(bad) = prior
        .iter()
        .enumerate()
        .find(|(k, o)| o.order != *k || o.nodes.len() != grid.len())
    {
        return Err(PerturbationError::PriorOrderMissing { order: bad.0 });
    }
    let nodes = (0..grid.len())
        .into_par_iter()
        .map(|i| solve_node(model, spec.side, grid, i, prior, settings))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(OrderCoefficients { order: n, nodes })
}

/// Order zero: `f_0 = c_{0,0} x^rho` with the boundary from value matching
/// and smooth pasting, independently at every node.
pub fn solve_order0(
    model: &ModelParams,
    spec: &OptionSpec,
    grid: &MaturityGrid,
    settings: &PerturbationSettings,
) -> Result<OrderCoefficients, PerturbationError> {
    solve_order(model, spec, grid, &[], settings)
}

/// Order `n = prior.len() >= 1`, given orders `0..n` with their `h`-derivatives.
///
/// The logarithmic coefficients come from the triangular system, the
/// boundary from a bracketed search started at the previous order's boundary,
/// and the constant term from smooth pasting.
pub fn solve_ordern(
    model: &ModelParams,
    spec: &OptionSpec,
    grid: &MaturityGrid,
    prior: &[OrderCoefficients],
    settings: &PerturbationSettings,
) -> Result<OrderCoefficients, PerturbationError> {
    if prior.is_empty() {
        return Err(PerturbationError::PriorOrderMissing { order: 0 });
    }
    solve_order(model, spec, grid, prior, settings)
}

/// Closed-form maturity sensitivities of the order-zero solution.
///
/// Order zero satisfies `G(b, T) = b (s - Delta)/rho - (s (b - 1) - V) = 0`
/// with `V`, `Delta` the European price and delta at the boundary and `s` the
/// sign of the payoff. The implicit function theorem gives
/// `db/dT = -G_T / G_b`, and
/// `c_{0,0} = b^{1-rho} (s - Delta) / (h rho)` is then differentiated
/// logarithmically.
pub fn order0_sensitivities(
    model: &ModelParams,
    side: Side,
    node: &NodeCoefficients,
) -> Result<Order0Sensitivities, PerturbationError> {
    let (t, h, rho, b) = (node.maturity, node.h, node.rho, node.boundary);
    let s = side.sign();
    let g: Greeks = european_vanilla_greeks(model, &unit_spec(side, t)?, b, t)?;
    let dh_dt = model.r * (1.0 - h);
    let rho_t = node.d_rho_dh * dh_dt;
    let gap = s - g.delta;
    let g_t = -b * g.delta_theta / rho - b * gap * rho_t / (rho * rho) + g.theta;
    let g_b = gap / rho - b * g.gamma / rho - s + g.delta;
    let b_t = -g_t / g_b;
    let c = node.c[0];
    let dc_dt = c
        * (-rho_t * b.ln() + (1.0 - rho) * b_t / b
            - (g.delta_theta + g.gamma * b_t) / gap
            - dh_dt / h
            - rho_t / rho);
    Ok(Order0Sensitivities {
        d_boundary_dt: b_t,
        d_c00_dh: dc_dt / dh_dt,
    })
}

/// Fills `dc_dh` for every node of `coefficients`.
///
/// Order zero uses [`order0_sensitivities`] when `settings.analytic_order0`
/// is set; everything else uses three-point differences in `h`.
pub fn compute_h_derivatives(
    model: &ModelParams,
    spec: &OptionSpec,
    grid: &MaturityGrid,
    coefficients: &mut OrderCoefficients,
    settings: &PerturbationSettings,
) -> Result<(), PerturbationError> {
    if coefficients.nodes.len() != grid.len() {
        return Err(PerturbationError::PriorOrderMissing {
            order: coefficients.order,
        });
    }
    if coefficients.order == 0 && settings.analytic_order0 {
        let d: Vec<f64> = coefficients
            .nodes
            .par_iter()
            .map(|node| order0_sensitivities(model, spec.side, node).map(|s| s.d_c00_dh))
            .collect::<Result<_, _>>()?;
        for (node, d) in coefficients.nodes.iter_mut().zip(d) {
            node.dc_dh = Some(vec![d]);
        }
        return Ok(());
    }
    let width = 2 * coefficients.order + 1;
    let mut columns = Vec::with_capacity(width);
    for j in 0..width {
        let values: Vec<f64> = coefficients.nodes.iter().map(|node| node.c[j]).collect();
        columns.push(finite_difference_dh(grid.h_values(), &values)?);
    }
    for (i, node) in coefficients.nodes.iter_mut().enumerate() {
        node.dc_dh = Some(columns.iter().map(|col| col[i]).collect());
    }
    Ok(())
}

/// Orders `0..=N` solved on a maturity grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VanillaSolution {
    pub model: ModelParams,
    pub side: Side,
    pub strike: f64,
    pub grid: MaturityGrid,
    pub orders: Vec<OrderCoefficients>,
}

impl VanillaSolution {
    /// Solves orders `0..=max_order`, computing `h`-derivatives between orders.
    pub fn solve(
        model: &ModelParams,
        spec: &OptionSpec,
        grid: MaturityGrid,
        max_order: usize,
        settings: &PerturbationSettings,
    ) -> Result<Self, PerturbationError> {
        spec.validate()?;
        model.validate()?;
        let mut orders: Vec<OrderCoefficients> = Vec::with_capacity(max_order + 1);
        for n in 0..=max_order {
            let mut next = solve_order(model, spec, &grid, &orders, settings)?;
            if n < max_order {
                compute_h_derivatives(model, spec, &grid, &mut next, settings)?;
            }
            orders.push(next);
        }
        Ok(Self {
            model: *model,
            side: spec.side,
            strike: spec.strike,
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
        self.strike * self.orders[order].nodes[node].boundary
    }

    fn partial_sum(&self, node: usize, order: usize, x: f64) -> (f64, f64) {
        self.orders[..=order]
            .iter()
            .map(|o| o.nodes[node].term(x))
            .fold((0.0, 0.0), |acc, v| (acc.0 + v.0, acc.1 + v.1))
    }

    /// Premium `h F_N(h, S/K)` in currency, ignoring the exercise region.
    pub fn premium(&self, node: usize, order: usize, spot: f64) -> f64 {
        let h = self.grid.h_values()[node];
        self.strike * h * self.partial_sum(node, order, spot / self.strike).0
    }

    /// Spot derivative of [`Self::premium`].
    pub fn premium_dx(&self, node: usize, order: usize, spot: f64) -> f64 {
        let h = self.grid.h_values()[node];
        h * self.partial_sum(node, order, spot / self.strike).1
    }

    fn european_at_boundary(
        &self,
        node: usize,
        order: usize,
    ) -> Result<(f64, Greeks), PerturbationError> {
        let t = self.grid.nodes()[node];
        let b = self.boundary(node, order);
        let spec = OptionSpec::new(self.side, self.strike, t)?;
        Ok((b, european_vanilla_greeks(&self.model, &spec, b, t)?))
    }

    /// `|h F_N(b) - (s (b - K) - V_E(b))|` in currency.
    pub fn value_matching_residual(
        &self,
        node: usize,
        order: usize,
    ) -> Result<f64, PerturbationError> {
        let (b, e) = self.european_at_boundary(node, order)?;
        let s = self.side.sign();
        Ok((self.premium(node, order, b) - (s * (b - self.strike) - e.price)).abs())
    }

    /// `|h dF_N/dx(b) - (s - Delta_E(b))|`.
    pub fn smooth_pasting_residual(
        &self,
        node: usize,
        order: usize,
    ) -> Result<f64, PerturbationError> {
        let (b, e) = self.european_at_boundary(node, order)?;
        Ok((self.premium_dx(node, order, b) - (self.side.sign() - e.delta)).abs())
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
