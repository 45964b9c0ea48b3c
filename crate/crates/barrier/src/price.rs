//! Prices of American knock-out options at a single maturity.

use std::time::Instant;

use jumpwave_european::{european_barrier, BarrierSpec, OptionSpec, Side};
use jumpwave_model::ModelParams;
use jumpwave_vanilla::{MaturityGrid, PerturbationError, PerturbationSettings, PriceReport};
use serde::Serialize;

use crate::problem::BarrierProblem;
use crate::solver::BarrierSolution;

/// Exercise boundary of a knock-out option over a maturity grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BarrierBoundaryCurve {
    pub grid: MaturityGrid,
    /// Boundary in currency at each node.
    pub values: Vec<f64>,
}

/// Order-`N` price of an American down-and-out call or up-and-out put with
/// default settings.
pub fn american_barrier_price(
    model: &ModelParams,
    spec: &OptionSpec,
    barrier: &BarrierSpec,
    s0: f64,
    tau: f64,
    n: usize,
) -> Result<PriceReport, PerturbationError> {
    american_barrier_price_with(
        model,
        spec,
        barrier,
        s0,
        tau,
        n,
        &PerturbationSettings::default(),
    )
}

/// Order-`N` price of an American down-and-out call or up-and-out put.
///
/// On the knocked-out side the rebate is returned with the `knocked_out`
/// flag. In the continuation region the price is the European knock-out
/// price (with its rebate) plus `h(T) sum_{n <= N} f_n(S0)`, and in the
/// exercise region it is the intrinsic value. Calls on assets without a
/// positive dividend yield are never exercised early and return the European
/// price. The `h`-derivatives are taken on a stencil of `2N + 1` maturities
/// uniform in `h` around `tau`.
pub fn american_barrier_price_with(
    model: &ModelParams,
    spec: &OptionSpec,
    barrier: &BarrierSpec,
    s0: f64,
    tau: f64,
    n: usize,
    settings: &PerturbationSettings,
) -> Result<PriceReport, PerturbationError> {
    let clock = Instant::now();
    model.validate()?;
    let problem = BarrierProblem::new(spec, barrier)?;
    if !(s0 > 0.0 && s0.is_finite() && tau >= 0.0 && tau.is_finite()) {
        return Err(PerturbationError::InvalidInput(format!(
            "spot must be positive and maturity non-negative, got S0 = {s0}, T = {tau}"
        )));
    }
    let european = european_barrier(model, spec, barrier, s0, tau)?;
    let finish = |mut report: PriceReport| {
        report.wall_time_s = clock.elapsed().as_secs_f64();
        Ok(report)
    };
    if european.knocked_out {
        let mut report = PriceReport::flat(european.price, european.price, n);
        report.flags.knocked_out = true;
        return finish(report);
    }
    let intrinsic = spec.side.intrinsic(s0, spec.strike);
    if tau == 0.0 {
        let mut report = PriceReport::flat(intrinsic, european.price, n);
        report.flags.exercised = intrinsic > 0.0;
        return finish(report);
    }
    if spec.side == Side::Call && model.delta <= 0.0 {
        let mut report = PriceReport::flat(european.price, european.price, n);
        report.flags.premium_negligible = true;
        return finish(report);
    }

    let grid = if n == 0 {
        MaturityGrid::new(vec![tau], model.r)?
    } else {
        MaturityGrid::stencil(tau, model.r, n, settings.stencil_step)?
    };
    let centre = grid.len() / 2;
    let solution = BarrierSolution::solve(model, &problem, grid, n, settings)?;

    let x0 = s0 / spec.strike;
    let mut prices = Vec::with_capacity(n + 1);
    let mut boundaries = Vec::with_capacity(n + 1);
    let mut exercised = false;
    for k in 0..=n {
        let b = solution.orders[k].nodes[centre].boundary;
        exercised = problem.exercised(x0, b);
        prices.push(if exercised {
            intrinsic
        } else {
            european.price + solution.premium(centre, k, s0)
        });
        boundaries.push(b * spec.strike);
    }
    let mut report = PriceReport::from_orders(european.price, &prices, boundaries, spec.strike);
    report.flags.exercised = exercised;
    report.flags.tangent_boundary = (0..=n).any(|k| !solution.value_matched(centre, k));
    report.iterations = solution.iterations();
    finish(report)
}

/// Order-`N` exercise boundary at every node of `grid`.
pub fn barrier_boundary_curve(
    model: &ModelParams,
    spec: &OptionSpec,
    barrier: &BarrierSpec,
    grid: &MaturityGrid,
    n: usize,
) -> Result<BarrierBoundaryCurve, PerturbationError> {
    let problem = BarrierProblem::new(spec, barrier)?;
    let solution = BarrierSolution::solve(
        model,
        &problem,
        grid.clone(),
        n,
        &PerturbationSettings::default(),
    )?;
    let values = (0..grid.len()).map(|i| solution.boundary(i, n)).collect();
    Ok(BarrierBoundaryCurve {
        grid: grid.clone(),
        values,
    })
}
