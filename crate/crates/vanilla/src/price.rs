//! Prices at a single maturity and boundary curves over a grid.

use std::time::Instant;

use jumpwave_european::{european_vanilla, OptionSpec, Side};
use jumpwave_model::ModelParams;
use serde::Serialize;

use crate::grid::MaturityGrid;
use crate::report::PriceReport;
use crate::solver::{trivial_premium_check, PerturbationSettings, PremiumRegime, VanillaSolution};
use crate::PerturbationError;

/// Exercise boundary over a maturity grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryCurve {
    pub grid: MaturityGrid,
    /// Boundary in currency at each node.
    pub values: Vec<f64>,
}

/// Order-`N` price of an American call or put with default settings.
pub fn american_vanilla_price(
    model: &ModelParams,
    spec: &OptionSpec,
    s0: f64,
    tau: f64,
    n: usize,
) -> Result<PriceReport, PerturbationError> {
    american_vanilla_price_with(model, spec, s0, tau, n, &PerturbationSettings::default())
}

/// Order-`N` price of an American call or put.
///
/// Below the boundary (calls; above it for puts) the price is the European
/// price plus `h(T) sum_{n <= N} f_n(S0)`; in the exercise region it is the
/// intrinsic value. The `h`-derivatives are taken on a stencil of `2N + 1`
/// maturities uniform in `h` around `tau`, so the centre node only sees
/// central differences.
pub fn american_vanilla_price_with(
    model: &ModelParams,
    spec: &OptionSpec,
    s0: f64,
    tau: f64,
    n: usize,
    settings: &PerturbationSettings,
) -> Result<PriceReport, PerturbationError> {
    let clock = Instant::now();
    model.validate()?;
    spec.validate()?;
    if !(s0 > 0.0 && s0.is_finite() && tau >= 0.0 && tau.is_finite()) {
        return Err(PerturbationError::InvalidInput(format!(
            "spot must be positive and maturity non-negative, got S0 = {s0}, T = {tau}"
        )));
    }
    let european = european_vanilla(model, spec, s0, tau)?;
    let intrinsic = spec.side.intrinsic(s0, spec.strike);
    if tau == 0.0 {
        let mut report = PriceReport::flat(intrinsic, european, n);
        report.flags.exercised = intrinsic > 0.0;
        report.wall_time_s = clock.elapsed().as_secs_f64();
        return Ok(report);
    }
    if trivial_premium_check(model, spec) == PremiumRegime::Zero {
        let mut report = PriceReport::flat(european, european, n);
        report.flags.premium_negligible = true;
        report.wall_time_s = clock.elapsed().as_secs_f64();
        return Ok(report);
    }

    let grid = if n == 0 {
        MaturityGrid::new(vec![tau], model.r)?
    } else {
        MaturityGrid::stencil(tau, model.r, n, settings.stencil_step)?
    };
    let centre = grid.len() / 2;
    let solution = VanillaSolution::solve(model, spec, grid, n, settings)?;

    let mut prices = Vec::with_capacity(n + 1);
    let mut boundaries = Vec::with_capacity(n + 1);
    let mut exercised = false;
    for k in 0..=n {
        let b = solution.boundary(centre, k);
        exercised = match spec.side {
            Side::Call => s0 >= b,
            Side::Put => s0 <= b,
        };
        prices.push(if exercised {
            intrinsic
        } else {
            european + solution.premium(centre, k, s0)
        });
        boundaries.push(b);
    }
    let mut report = PriceReport::from_orders(european, &prices, boundaries, spec.strike);
    report.flags.exercised = exercised;
    report.flags.tangent_boundary = (0..=n).any(|k| !solution.value_matched(centre, k));
    report.iterations = solution.iterations();
    report.wall_time_s = clock.elapsed().as_secs_f64();
    Ok(report)
}

/// Order-`N` exercise boundary at every node of `grid`.
pub fn boundary_curve(
    model: &ModelParams,
    spec: &OptionSpec,
    grid: &MaturityGrid,
    n: usize,
) -> Result<BoundaryCurve, PerturbationError> {
    let solution = VanillaSolution::solve(
        model,
        spec,
        grid.clone(),
        n,
        &PerturbationSettings::default(),
    )?;
    let values = (0..grid.len()).map(|i| solution.boundary(i, n)).collect();
    Ok(BoundaryCurve {
        grid: grid.clone(),
        values,
    })
}
