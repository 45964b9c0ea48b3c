//! Absolute pricing errors of each order along one parameter axis.
//!
//! A sweep starts from a base contract, changes one parameter (maturity,
//! diffusion volatility, jump intensity or jump size) over a linear grid and
//! compares every order with the benchmark engine at each point.

use jumpwave_bench::{FdGridSpec, TreeSpec};
use jumpwave_european::{BarrierDirection, BarrierSpec, RebateRule, Side};
use jumpwave_model::{JumpSpec, ModelParams};
use jumpwave_vanilla::PerturbationSettings;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::SweepAxis;
use crate::error::CliError;
use crate::pricing::Contract;

impl SweepAxis {
    /// Column name in the CSV.
    pub fn name(self) -> &'static str {
        match self {
            Self::Maturity => "maturity",
            Self::Sigma => "sigma",
            Self::Lambda => "lambda",
            Self::JumpSize => "jump_size",
        }
    }

    /// Default range `(from, to, points)` of the axis.
    pub fn default_range(self) -> (f64, f64, usize) {
        match self {
            Self::Maturity => (0.5, 10.0, 20),
            Self::Sigma => (0.075, 0.525, 19),
            Self::Lambda => (0.0, 20.0, 21),
            Self::JumpSize => (-0.3, 0.3, 25),
        }
    }
}

/// Base point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepBase {
    pub contract: Contract,
    pub spot: f64,
    pub maturity: f64,
}

impl SweepBase {
    /// Default base of each axis: a Merton put with carry 0.04 at S0 = 110
    /// for maturities, and an at-the-money Merton call with zero carry at
    /// T = 0.75 for the model parameters.
    pub fn default_for(axis: SweepAxis) -> Self {
        match axis {
            SweepAxis::Maturity => Self {
                contract: Contract {
                    model: ModelParams::merton(0.08, 0.04, 0.2, 2.5, 0.05, 0.03)
                        .expect("valid defaults"),
                    side: Side::Put,
                    strike: 100.0,
                    barrier: None,
                },
                spot: 110.0,
                maturity: 1.0,
            },
            _ => Self {
                contract: Contract {
                    model: ModelParams::merton(0.08, 0.08, 0.2, 2.5, 0.05, 0.03)
                        .expect("valid defaults"),
                    side: Side::Call,
                    strike: 100.0,
                    barrier: None,
                },
                spot: 100.0,
                maturity: 0.75,
            },
        }
    }

    /// Up-and-out put used for barrier sweeps over maturity and volatility.
    pub fn default_barrier() -> Self {
        Self {
            contract: Contract {
                model: ModelParams::black_scholes(0.0488, 0.025, 0.2).expect("valid defaults"),
                side: Side::Put,
                strike: 45.0,
                barrier: Some(BarrierSpec {
                    level: 50.0,
                    direction: BarrierDirection::UpAndOut,
                    rebate: RebateRule::Zero,
                }),
            },
            spot: 40.0,
            maturity: 0.75,
        }
    }
}

/// Complete description of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: SweepAxis,
    pub base: SweepBase,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub orders: Vec<usize>,
    pub settings: PerturbationSettings,
    pub fd: FdGridSpec,
    pub tree: TreeSpec,
}

impl SweepSpec {
    /// Sweep of `axis` over its default range from its default base.
    pub fn new(axis: SweepAxis) -> Self {
        let (from, to, points) = axis.default_range();
        Self {
            axis,
            base: SweepBase::default_for(axis),
            from,
            to,
            points,
            orders: vec![0, 1, 2, 3],
            settings: PerturbationSettings::default(),
            fd: FdGridSpec::default(),
            tree: TreeSpec::default(),
        }
    }

    /// Axis values, evenly spaced and including both ends.
    pub fn values(&self) -> Vec<f64> {
        if self.points <= 1 {
            return vec![self.from];
        }
        let step = (self.to - self.from) / (self.points - 1) as f64;
        (0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.to
                } else {
                    self.from + i as f64 * step
                }
            })
            .collect()
    }

    /// Contract, spot and maturity at axis value `v`.
    pub fn point(&self, v: f64) -> Result<SweepBase, CliError> {
        let mut p = self.base;
        let m = p.contract.model;
        let bad = |e: jumpwave_model::ModelError| {
            CliError::Config(format!("{} = {v}: {e}", self.axis.name()))
        };
        match self.axis {
            SweepAxis::Maturity => p.maturity = v,
            SweepAxis::Sigma => {
                p.contract.model =
                    ModelParams::new(m.r, m.delta, v, m.lambda, m.jump).map_err(bad)?
            }
            SweepAxis::Lambda => {
                p.contract.model =
                    ModelParams::new(m.r, m.delta, m.sigma, v, m.jump).map_err(bad)?
            }
            SweepAxis::JumpSize => {
                let jump = match m.jump {
                    JumpSpec::Normal { sigma, .. } => JumpSpec::Normal { mu: v, sigma },
                    JumpSpec::Constant { .. } => JumpSpec::Constant { phi: v },
                    JumpSpec::None => {
                        return Err(CliError::Config(
                            "a jump-size sweep needs a model with jumps".into(),
                        ))
                    }
                };
                p.contract.model =
                    ModelParams::new(m.r, m.delta, m.sigma, m.lambda, jump).map_err(bad)?
            }
        }
        if p.contract.barrier.is_some()
            && matches!(self.axis, SweepAxis::Lambda | SweepAxis::JumpSize)
        {
            return Err(CliError::Config(
                "barrier contracts only support maturity and sigma sweeps".into(),
            ));
        }
        Ok(p)
    }
}

/// Errors at one axis value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub value: f64,
    pub benchmark: f64,
    pub prices: Vec<f64>,
    /// `|price - benchmark|` per requested order.
    pub errors: Vec<f64>,
}

/// Result of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: SweepAxis,
    pub orders: Vec<usize>,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    /// Largest absolute error of the `k`-th requested order over points whose
    /// axis value lies in `[lo, hi]`.
    pub fn max_error(&self, k: usize, lo: f64, hi: f64) -> f64 {
        self.points
            .iter()
            .filter(|p| p.value >= lo && p.value <= hi)
            .map(|p| p.errors[k])
            .fold(0.0, f64::max)
    }
}

/// Runs the sweep on the current rayon pool.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult, CliError> {
    crate::config::validate_orders(&spec.orders)?;
    if spec.points == 0 {
        return Err(CliError::Config("sweep: points must be positive".into()));
    }
    let max_order = *spec.orders.iter().max().expect("orders are not empty");
    let points = spec
        .values()
        .par_iter()
        .map(|&v| {
            let p = spec.point(v)?;
            let context = |e: CliError| match e {
                CliError::Solver(m) => CliError::Solver(format!("{} = {v}: {m}", spec.axis.name())),
                other => other,
            };
            let report = p
                .contract
                .approximate(p.spot, p.maturity, max_order, &spec.settings)
                .map_err(context)?;
            let all = report.prices_by_order();
            let benchmark = p
                .contract
                .benchmark(p.spot, p.maturity, &spec.fd, &spec.tree)
                .map_err(context)?;
            let prices: Vec<f64> = spec.orders.iter().map(|&n| all[n]).collect();
            let errors = prices.iter().map(|x| (x - benchmark).abs()).collect();
            Ok(SweepPoint {
                value: v,
                benchmark,
                prices,
                errors,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(SweepResult {
        axis: spec.axis,
        orders: spec.orders.clone(),
        points,
    })
}

/// CSV with the axis value and the absolute error of each order, at full
/// precision.
pub fn sweep_csv(result: &SweepResult) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    let mut header = vec![result.axis.name().to_string()];
    header.extend(result.orders.iter().map(|n| format!("err_n{n}")));
    w.write_record(&header).map_err(io)?;
    for p in &result.points {
        let mut rec = vec![format!("{}", p.value)];
        rec.extend(p.errors.iter().map(|e| format!("{e}")));
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}
