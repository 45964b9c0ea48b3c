//! `jumpwave` command-line tool.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use jumpwave_cli::{
    cmd_benchmark, cmd_price, cmd_sweep, cmd_table, emit, init_threads, parse_orders, CliError,
    Overrides, RunConfig, SweepAxis,
};

/// Higher-order early-exercise approximations for American vanilla and
/// knock-out options, with finite-difference and lattice benchmarks.
#[derive(Debug, Parser)]
#[command(name = "jumpwave", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Orders to evaluate: `3`, `0,2` or `0..3`.
    #[arg(long, global = true)]
    orders: Option<String>,
    /// Use the printed benchmark column instead of running the benchmark engine.
    #[arg(long, global = true)]
    no_benchmark: bool,
    /// Worker threads; defaults to one per hardware thread.
    #[arg(long, global = true, env = "JUMPWAVE_THREADS")]
    threads: Option<usize>,
    /// Emit JSON at full precision instead of CSV.
    #[arg(long, global = true)]
    json: bool,
    /// Write the data document to this file instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Price every spot, maturity and order of the configured scenario.
    Price,
    /// Regenerate one of the validation tables.
    Table {
        /// Table number, 1 to 7.
        #[arg(value_parser = clap::value_parser!(u8).range(1..=7))]
        id: u8,
    },
    /// Absolute error of each order against the benchmark along one axis.
    Sweep {
        /// Parameter to vary; falls back to the configuration.
        #[arg(value_enum)]
        axis: Option<SweepAxis>,
    },
    /// Benchmark prices for the configured scenario.
    Benchmark,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let overrides = Overrides {
        orders: cli.orders.as_deref().map(parse_orders).transpose()?,
        no_benchmark: cli.no_benchmark,
        json: cli.json,
        out: cli.out,
    };
    init_threads(cli.threads)?;
    let output = match cli.command {
        Command::Price => cmd_price(&config, &overrides)?,
        Command::Table { id } => cmd_table(id, &config, &overrides)?,
        Command::Sweep { axis } => cmd_sweep(axis, &config, &overrides)?,
        Command::Benchmark => cmd_benchmark(&config, &overrides)?,
    };
    emit(&output)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("jumpwave: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
