//! Run configuration read from a TOML file.
//!
//! ```toml
//! [model]
//! r = 0.08
//! b = -0.04            # cost of carry r - delta; give either b or delta
//! sigma = 0.2
//! lambda = 2.5
//! jump = { kind = "normal", mu = 0.05, sigma = 0.03 }   # or "constant" / "none"
//!
//! [contract]
//! side = "call"
//! strike = 100.0
//! # barrier = { level = 40.0, direction = "down_and_out", rebate = "zero" }
//!
//! [scenario]
//! spots = [80.0, 90.0, 100.0, 110.0, 120.0]
//! maturities = [0.25, 0.75, 1.5]
//! orders = [0, 1, 2, 3]
//!
//! [numerics]
//! stencil_step = 5e-3
//! boundary_xtol = 1e-13
//! tangent_fallback = true
//! benchmark = true
//! fd = { x_min = -3.0, x_max = 3.0, n_space = 801, jump_width = 6.0 }
//! tree = { n_steps = 5000 }
//!
//! [sweep]
//! axis = "maturity"    # maturity, sigma, lambda or jump_size
//! from = 0.5
//! to = 10.0
//! points = 20
//!
//! [output]
//! format = "csv"       # or "json"
//! path = "out.csv"
//! ```
//!
//! Every block and key is optional unless a command needs it; unknown keys are
//! rejected. Command-line flags override the file.

use std::path::Path;

use jumpwave_bench::{FdGridSpec, TreeSpec};
use jumpwave_european::{BarrierDirection, BarrierSpec, OptionSpec, RebateRule, Side};
use jumpwave_model::{JumpSpec, ModelParams};
use jumpwave_vanilla::PerturbationSettings;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Whole configuration file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelBlock>,
    pub contract: Option<ContractBlock>,
    #[serde(default)]
    pub scenario: ScenarioBlock,
    #[serde(default)]
    pub numerics: NumericsBlock,
    pub sweep: Option<SweepBlock>,
    #[serde(default)]
    pub output: OutputBlock,
}

/// Dynamics of the underlying.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    pub r: f64,
    /// Dividend yield; exclusive with `b`.
    pub delta: Option<f64>,
    /// Cost of carry `r - delta`; exclusive with `delta`.
    pub b: Option<f64>,
    pub sigma: f64,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default = "no_jumps")]
    pub jump: JumpSpec,
}

fn no_jumps() -> JumpSpec {
    JumpSpec::None
}

impl ModelBlock {
    /// Parameter set of the block.
    pub fn params(&self) -> Result<ModelParams, CliError> {
        let delta = match (self.delta, self.b) {
            (Some(d), None) => d,
            (None, Some(b)) => self.r - b,
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "model: give either `delta` or `b`, not both".into(),
                ))
            }
            (None, None) => {
                return Err(CliError::Config(
                    "model: one of `delta` or `b` is required".into(),
                ))
            }
        };
        ModelParams::new(self.r, delta, self.sigma, self.lambda, self.jump)
            .map_err(|e| CliError::Config(format!("model: {e}")))
    }

    /// Block describing `model`, with the dividend yield given directly.
    pub fn from_params(model: &ModelParams) -> Self {
        Self {
            r: model.r,
            delta: Some(model.delta),
            b: None,
            sigma: model.sigma,
            lambda: model.lambda,
            jump: model.jump,
        }
    }
}

/// Contract terms; the maturity comes from the scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContractBlock {
    pub side: Side,
    pub strike: f64,
    pub barrier: Option<BarrierBlock>,
}

/// Knock-out barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BarrierBlock {
    pub level: f64,
    pub direction: BarrierDirection,
    #[serde(default)]
    pub rebate: RebateRule,
}

impl ContractBlock {
    /// Contract at maturity `t`.
    pub fn spec(&self, t: f64) -> Result<OptionSpec, CliError> {
        OptionSpec::new(self.side, self.strike, t)
            .map_err(|e| CliError::Config(format!("contract: {e}")))
    }

    /// Barrier, if any.
    pub fn barrier(&self) -> Option<BarrierSpec> {
        self.barrier.map(|b| BarrierSpec {
            level: b.level,
            direction: b.direction,
            rebate: b.rebate,
        })
    }
}

/// Spots, maturities and orders to evaluate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioBlock {
    #[serde(default)]
    pub spots: Vec<f64>,
    #[serde(default)]
    pub maturities: Vec<f64>,
    #[serde(default = "all_orders")]
    pub orders: Vec<usize>,
}

impl Default for ScenarioBlock {
    fn default() -> Self {
        Self {
            spots: Vec::new(),
            maturities: Vec::new(),
            orders: all_orders(),
        }
    }
}

fn all_orders() -> Vec<usize> {
    vec![0, 1, 2, 3]
}

/// Numerical settings of all engines. Omitted keys take their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericsBlock {
    pub stencil_step: f64,
    pub boundary_xtol: f64,
    pub tangent_fallback: bool,
    pub analytic_order0: bool,
    /// Compute benchmark prices in tables and sweeps.
    pub benchmark: bool,
    pub fd: FdGridSpec,
    pub tree: TreeBlock,
}

impl Default for NumericsBlock {
    fn default() -> Self {
        let s = PerturbationSettings::default();
        Self {
            stencil_step: s.stencil_step,
            boundary_xtol: s.boundary_xtol,
            tangent_fallback: s.tangent_fallback,
            analytic_order0: s.analytic_order0,
            benchmark: true,
            fd: FdGridSpec::default(),
            tree: TreeBlock::default(),
        }
    }
}

impl NumericsBlock {
    /// Settings of the perturbation solvers.
    pub fn settings(&self) -> PerturbationSettings {
        PerturbationSettings {
            stencil_step: self.stencil_step,
            analytic_order0: self.analytic_order0,
            boundary_xtol: self.boundary_xtol,
            tangent_fallback: self.tangent_fallback,
        }
    }

    /// American lattice settings.
    pub fn tree(&self) -> TreeSpec {
        TreeSpec {
            n_steps: self.tree.n_steps,
            american: true,
        }
    }
}

/// Lattice size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeBlock {
    pub n_steps: usize,
}

impl Default for TreeBlock {
    fn default() -> Self {
        Self {
            n_steps: TreeSpec::default().n_steps,
        }
    }
}

// Partial numerics blocks fill the remaining fields from the defaults.
impl<'de> Deserialize<'de> for NumericsBlock {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Partial {
            stencil_step: Option<f64>,
            boundary_xtol: Option<f64>,
            tangent_fallback: Option<bool>,
            analytic_order0: Option<bool>,
            benchmark: Option<bool>,
            fd: Option<PartialFd>,
            tree: Option<TreeBlock>,
        }
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct PartialFd {
            x_min: Option<f64>,
            x_max: Option<f64>,
            n_space: Option<usize>,
            n_time: Option<usize>,
            jump_width: Option<f64>,
        }
        let p = Partial::deserialize(d)?;
        let base = Self::default();
        let fd = match p.fd {
            None => base.fd,
            Some(f) => FdGridSpec {
                x_min: f.x_min.unwrap_or(base.fd.x_min),
                x_max: f.x_max.unwrap_or(base.fd.x_max),
                n_space: f.n_space.unwrap_or(base.fd.n_space),
                n_time: f.n_time.or(base.fd.n_time),
                jump_width: f.jump_width.unwrap_or(base.fd.jump_width),
            },
        };
        Ok(Self {
            stencil_step: p.stencil_step.unwrap_or(base.stencil_step),
            boundary_xtol: p.boundary_xtol.unwrap_or(base.boundary_xtol),
            tangent_fallback: p.tangent_fallback.unwrap_or(base.tangent_fallback),
            analytic_order0: p.analytic_order0.unwrap_or(base.analytic_order0),
            benchmark: p.benchmark.unwrap_or(base.benchmark),
            fd,
            tree: p.tree.unwrap_or(base.tree),
        })
    }
}

/// Parameter varied by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SweepAxis {
    Maturity,
    Sigma,
    Lambda,
    JumpSize,
}

/// Sweep range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    pub axis: Option<SweepAxis>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
}

/// Output format.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Where and how results are written.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputBlock {
    #[serde(default)]
    pub format: OutputFormat,
    pub path: Option<String>,
}

impl RunConfig {
    /// Parses a configuration from TOML text.
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let config: Self =
            toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads and parses a configuration file.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Checks the cross-field rules that the schema cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(model) = &self.model {
            model.params()?;
        }
        if let Some(contract) = &self.contract {
            let spec = contract.spec(1.0)?;
            if let Some(barrier) = contract.barrier() {
                barrier
                    .validate(&spec)
                    .map_err(|e| CliError::Config(format!("contract: {e}")))?;
            }
        }
        let s = &self.scenario;
        if let Some(x) = s.spots.iter().find(|x| !(**x > 0.0 && x.is_finite())) {
            return Err(CliError::Config(format!(
                "scenario: spot {x} must be positive"
            )));
        }
        if let Some(t) = s.maturities.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
            return Err(CliError::Config(format!(
                "scenario: maturity {t} must be non-negative"
            )));
        }
        validate_orders(&s.orders)?;
        let n = &self.numerics;
        if !(n.stencil_step > 0.0 && n.stencil_step < 0.5) {
            return Err(CliError::Config(format!(
                "numerics: stencil_step {} must lie in (0, 0.5)",
                n.stencil_step
            )));
        }
        if !(n.boundary_xtol > 0.0) {
            return Err(CliError::Config(
                "numerics: boundary_xtol must be positive".into(),
            ));
        }
        if let Some(sweep) = &self.sweep {
            if let Some(p) = sweep.points {
                if p == 0 {
                    return Err(CliError::Config("sweep: points must be positive".into()));
                }
            }
        }
        Ok(())
    }

    /// Model block, required by the caller.
    pub fn require_model(&self) -> Result<ModelParams, CliError> {
        self.model
            .as_ref()
            .ok_or_else(|| CliError::Config("a [model] block is required".into()))?
            .params()
    }

    /// Contract block, required by the caller.
    pub fn require_contract(&self) -> Result<ContractBlock, CliError> {
        self.contract
            .ok_or_else(|| CliError::Config("a [contract] block is required".into()))
    }
}

/// Orders must be distinct values in `0..=3`.
pub fn validate_orders(orders: &[usize]) -> Result<(), CliError> {
    if orders.is_empty() {
        return Err(CliError::Config("at least one order is required".into()));
    }
    if let Some(n) = orders.iter().find(|&&n| n > 3) {
        return Err(CliError::Config(format!(
            "order {n} is outside the supported range 0..3"
        )));
    }
    let mut sorted = orders.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != orders.len() {
        return Err(CliError::Config("orders must be distinct".into()));
    }
    Ok(())
}

/// Parses `--orders` values: a single order `2`, a list `0,2,3` or a range
/// `0..3` (inclusive).
pub fn parse_orders(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Config(format!("cannot read orders `{text}`"));
    let orders: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b
            .trim()
            .trim_start_matches('=')
            .parse()
            .map_err(|_| bad())?;
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        text.split(',')
            .map(|s| s.trim().parse().map_err(|_| bad()))
            .collect::<Result<_, _>>()?
    };
    validate_orders(&orders)?;
    Ok(orders)
}
