//! Dispatch of one contract to the approximation and benchmark engines.

use jumpwave_barrier::american_barrier_price_with;
use jumpwave_bench::{fd_american_vanilla, tree_american_barrier, FdGridSpec, TreeSpec};
use jumpwave_european::{BarrierSpec, OptionSpec, Side};
use jumpwave_model::ModelParams;
use jumpwave_vanilla::{american_vanilla_price_with, PerturbationSettings, PriceReport};

use crate::error::CliError;

/// A contract family: model, side, strike and optional barrier. The
/// maturity is supplied per evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contract {
    pub model: ModelParams,
    pub side: Side,
    pub strike: f64,
    pub barrier: Option<BarrierSpec>,
}

impl Contract {
    /// Contract terms at maturity `t`.
    pub fn spec(&self, t: f64) -> Result<OptionSpec, CliError> {
        OptionSpec::new(self.side, self.strike, t).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Order-`n` approximation with all lower orders.
    pub fn approximate(
        &self,
        s0: f64,
        t: f64,
        n: usize,
        settings: &PerturbationSettings,
    ) -> Result<PriceReport, CliError> {
        let spec = self.spec(t)?;
        let report = match &self.barrier {
            None => american_vanilla_price_with(&self.model, &spec, s0, t, n, settings)?,
            Some(b) => american_barrier_price_with(&self.model, &spec, b, s0, t, n, settings)?,
        };
        Ok(report)
    }

    /// Benchmark price: finite differences for vanillas, the trinomial
    /// lattice for knock-outs.
    pub fn benchmark(
        &self,
        s0: f64,
        t: f64,
        fd: &FdGridSpec,
        tree: &TreeSpec,
    ) -> Result<f64, CliError> {
        let spec = self.spec(t)?;
        let price = match &self.barrier {
            None => fd_american_vanilla(&self.model, &spec, s0, t, fd)?.price,
            Some(b) => tree_american_barrier(&self.model, &spec, b, s0, t, tree)?,
        };
        Ok(price)
    }
}
