//! The `price`, `table`, `sweep` and `benchmark` commands.
//!
//! Every command returns the data document (CSV, or JSON with `--json`) and a
//! human-readable summary. Data documents carry no timing, so identical
//! configurations give identical bytes; timings appear in the summary only.

use std::path::PathBuf;

use jumpwave_european::{european_barrier, european_vanilla};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{OutputFormat, RunConfig, SweepAxis};
use crate::error::CliError;
use crate::pricing::Contract;
use crate::sweep::{run_sweep, sweep_csv, SweepBase, SweepSpec};
use crate::tables::{run_table, table_csv, table_definition, table_summary, TableOptions};

/// Command-line values that take precedence over the configuration file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub orders: Option<Vec<usize>>,
    pub no_benchmark: bool,
    pub json: bool,
    pub out: Option<PathBuf>,
}

/// Output of a command.
#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    /// CSV or JSON document.
    pub data: String,
    /// Summary for the terminal.
    pub summary: String,
    /// Destination of `data`; standard output when absent.
    pub path: Option<PathBuf>,
}

struct Resolved {
    orders: Vec<usize>,
    benchmark: bool,
    json: bool,
    path: Option<PathBuf>,
}

fn resolve(config: &RunConfig, overrides: &Overrides) -> Resolved {
    Resolved {
        orders: overrides
            .orders
            .clone()
            .unwrap_or_else(|| config.scenario.orders.clone()),
        benchmark: config.numerics.benchmark && !overrides.no_benchmark,
        json: overrides.json || config.output.format == OutputFormat::Json,
        path: overrides
            .out
            .clone()
            .or_else(|| config.output.path.as_ref().map(PathBuf::from)),
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    serde_json::to_string_pretty(value)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Io(e.to_string()))
}

fn contract_of(config: &RunConfig) -> Result<Contract, CliError> {
    let model = config.require_model()?;
    let c = config.require_contract()?;
    let contract = Contract {
        model,
        side: c.side,
        strike: c.strike,
        barrier: c.barrier(),
    };
    if contract.barrier.is_some() && !model.is_black_scholes() {
        return Err(CliError::Config(
            "barrier contracts require a model without jumps".into(),
        ));
    }
    Ok(contract)
}

fn require_grid(config: &RunConfig) -> Result<(), CliError> {
    if config.scenario.spots.is_empty() || config.scenario.maturities.is_empty() {
        return Err(CliError::Config(
            "scenario: `spots` and `maturities` must both be non-empty".into(),
        ));
    }
    Ok(())
}

/// One row of `price` output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceRow {
    pub spot: f64,
    pub maturity: f64,
    pub order: usize,
    pub price: f64,
    pub european: f64,
    /// Contribution of each order up to this one, starting from the European
    /// price.
    pub premium_by_order: Vec<f64>,
    pub boundary: Option<f64>,
    pub knocked_out: bool,
    pub premium_negligible: bool,
    pub exercised: bool,
    pub tangent_boundary: bool,
    pub iterations: usize,
}

/// Prices every (spot, maturity, order) combination of the scenario.
pub fn cmd_price(config: &RunConfig, overrides: &Overrides) -> Result<CommandOutput, CliError> {
    let opts = resolve(config, overrides);
    crate::config::validate_orders(&opts.orders)?;
    require_grid(config)?;
    let contract = contract_of(config)?;
    let settings = config.numerics.settings();
    let max_order = *opts.orders.iter().max().expect("orders are not empty");
    let jobs: Vec<(f64, f64)> = config
        .scenario
        .maturities
        .iter()
        .flat_map(|&t| config.scenario.spots.iter().map(move |&s| (s, t)))
        .collect();
    let reports = jobs
        .par_iter()
        .map(|&(s, t)| {
            contract
                .approximate(s, t, max_order, &settings)
                .map_err(|e| match e {
                    CliError::Solver(m) => CliError::Solver(format!("S0 = {s}, T = {t}: {m}")),
                    other => other,
                })
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut rows = Vec::new();
    let mut seconds = 0.0;
    for (&(spot, maturity), report) in jobs.iter().zip(&reports) {
        seconds += report.wall_time_s;
        let prices = report.prices_by_order();
        for &n in &opts.orders {
            rows.push(PriceRow {
                spot,
                maturity,
                order: n,
                price: prices[n],
                european: report.european,
                premium_by_order: report.premium_by_order[..=n].to_vec(),
                boundary: report.boundary_by_order.get(n).copied(),
                knocked_out: report.flags.knocked_out,
                premium_negligible: report.flags.premium_negligible,
                exercised: report.flags.exercised,
                tangent_boundary: report.flags.tangent_boundary,
                iterations: report.iterations,
            });
        }
    }
    let data = if opts.json {
        to_json(&rows)?
    } else {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record([
            "spot",
            "maturity",
            "order",
            "price",
            "european",
            "premium",
            "boundary",
            "knocked_out",
            "premium_negligible",
            "exercised",
            "tangent_boundary",
        ])
        .map_err(io)?;
        for r in &rows {
            w.write_record([
                format!("{}", r.spot),
                format!("{}", r.maturity),
                format!("{}", r.order),
                format!("{}", r.price),
                format!("{}", r.european),
                format!("{}", r.price - r.european),
                r.boundary.map(|b| format!("{b}")).unwrap_or_default(),
                r.knocked_out.to_string(),
                r.premium_negligible.to_string(),
                r.exercised.to_string(),
                r.tangent_boundary.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))?
    };
    Ok(CommandOutput {
        data,
        summary: format!(
            "priced {} contracts up to order {max_order} in {seconds:.3} s\n",
            jobs.len()
        ),
        path: opts.path,
    })
}

/// Regenerates table `id`.
pub fn cmd_table(
    id: u8,
    config: &RunConfig,
    overrides: &Overrides,
) -> Result<CommandOutput, CliError> {
    let opts = resolve(config, overrides);
    let table = table_definition(id)?;
    let options = TableOptions {
        orders: opts.orders,
        benchmark: opts.benchmark,
        settings: config.numerics.settings(),
        fd: config.numerics.fd,
        tree: config.numerics.tree(),
    };
    let result = run_table(&table, &options)?;
    let data = if opts.json {
        to_json(&result)?
    } else {
        table_csv(&result)?
    };
    Ok(CommandOutput {
        data,
        summary: table_summary(&result),
        path: opts.path,
    })
}

/// Builds the sweep described by the configuration and the axis argument.
pub fn sweep_spec(
    axis: Option<SweepAxis>,
    config: &RunConfig,
    overrides: &Overrides,
) -> Result<SweepSpec, CliError> {
    let block = config.sweep.unwrap_or(crate::config::SweepBlock {
        axis: None,
        from: None,
        to: None,
        points: None,
    });
    let axis = axis.or(block.axis).ok_or_else(|| {
        CliError::Config("sweep: give an axis (maturity, sigma, lambda or jump_size)".into())
    })?;
    let mut spec = SweepSpec::new(axis);
    match (&config.model, &config.contract) {
        (None, None) => {}
        (Some(_), Some(_)) => {
            let contract = contract_of(config)?;
            let default = if contract.barrier.is_some() {
                SweepBase::default_barrier()
            } else {
                spec.base
            };
            spec.base = SweepBase {
                contract,
                spot: config
                    .scenario
                    .spots
                    .first()
                    .copied()
                    .unwrap_or(default.spot),
                maturity: config
                    .scenario
                    .maturities
                    .first()
                    .copied()
                    .unwrap_or(default.maturity),
            };
        }
        _ => {
            return Err(CliError::Config(
                "sweep: give both [model] and [contract], or neither for the default setup".into(),
            ))
        }
    }
    if let Some(v) = block.from {
        spec.from = v;
    }
    if let Some(v) = block.to {
        spec.to = v;
    }
    if let Some(v) = block.points {
        spec.points = v;
    }
    let opts = resolve(config, overrides);
    spec.orders = opts.orders;
    spec.settings = config.numerics.settings();
    spec.fd = config.numerics.fd;
    spec.tree = config.numerics.tree();
    Ok(spec)
}

/// Error sweep along one axis.
pub fn cmd_sweep(
    axis: Option<SweepAxis>,
    config: &RunConfig,
    overrides: &Overrides,
) -> Result<CommandOutput, CliError> {
    if overrides.no_benchmark {
        return Err(CliError::Config(
            "sweep: errors are measured against the benchmark, which cannot be disabled".into(),
        ));
    }
    let spec = sweep_spec(axis, config, overrides)?;
    let opts = resolve(config, overrides);
    let clock = std::time::Instant::now();
    let result = run_sweep(&spec)?;
    let seconds = clock.elapsed().as_secs_f64();
    let data = if opts.json {
        to_json(&result)?
    } else {
        sweep_csv(&result)?
    };
    let mut summary = format!(
        "sweep over {} from {} to {} ({} points) in {seconds:.3} s\n",
        spec.axis.name(),
        spec.from,
        spec.to,
        spec.points
    );
    for (k, n) in result.orders.iter().enumerate() {
        summary += &format!(
            "  N={n}: max |error| {:.6}\n",
            result.max_error(k, f64::NEG_INFINITY, f64::INFINITY)
        );
    }
    Ok(CommandOutput {
        data,
        summary,
        path: opts.path,
    })
}

/// One row of `benchmark` output.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchmarkRow {
    pub spot: f64,
    pub maturity: f64,
    pub european: f64,
    pub benchmark: f64,
}

/// Benchmark prices for every (spot, maturity) pair of the scenario.
pub fn cmd_benchmark(config: &RunConfig, overrides: &Overrides) -> Result<CommandOutput, CliError> {
    let opts = resolve(config, overrides);
    require_grid(config)?;
    let contract = contract_of(config)?;
    let (fd, tree) = (config.numerics.fd, config.numerics.tree());
    let jobs: Vec<(f64, f64)> = config
        .scenario
        .maturities
        .iter()
        .flat_map(|&t| config.scenario.spots.iter().map(move |&s| (s, t)))
        .collect();
    let clock = std::time::Instant::now();
    let rows = jobs
        .par_iter()
        .map(|&(spot, maturity)| {
            let spec = contract.spec(maturity)?;
            let european = match &contract.barrier {
                None => european_vanilla(&contract.model, &spec, spot, maturity),
                Some(b) => {
                    european_barrier(&contract.model, &spec, b, spot, maturity).map(|v| v.price)
                }
            }
            .map_err(|e| CliError::Solver(format!("European price: {e}")))?;
            let benchmark = contract.benchmark(spot, maturity, &fd, &tree)?;
            Ok(BenchmarkRow {
                spot,
                maturity,
                european,
                benchmark,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let seconds = clock.elapsed().as_secs_f64();
    let data = if opts.json {
        to_json(&rows)?
    } else {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::Io(e.to_string());
        w.write_record(["spot", "maturity", "european", "benchmark"])
            .map_err(io)?;
        for r in &rows {
            w.write_record([
                format!("{}", r.spot),
                format!("{}", r.maturity),
                format!("{}", r.european),
                format!("{}", r.benchmark),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))?
    };
    let engine = if contract.barrier.is_some() {
        "trinomial tree"
    } else {
        "finite differences"
    };
    Ok(CommandOutput {
        data,
        summary: format!(
            "{} benchmark prices ({engine}) in {seconds:.3} s\n",
            rows.len()
        ),
        path: opts.path,
    })
}

/// Writes the data document to its destination. The summary goes to standard
/// output when the data goes to a file, and to standard error otherwise.
pub fn emit(output: &CommandOutput) -> Result<(), CliError> {
    use std::io::Write;
    match &output.path {
        Some(path) => {
            std::fs::write(path, &output.data)
                .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
            print!("{}", output.summary);
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(output.data.as_bytes())
                .map_err(|e| CliError::Io(e.to_string()))?;
            eprint!("{}", output.summary);
        }
    }
    Ok(())
}

/// Sets the size of the global worker pool. `None` keeps rayon's default of
/// one worker per hardware thread.
pub fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    let Some(n) = threads else {
        return Ok(());
    };
    if n == 0 {
        return Err(CliError::Config("--threads must be positive".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot size the worker pool: {e}")))
}
