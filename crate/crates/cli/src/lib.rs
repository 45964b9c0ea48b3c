//! Command-line layer of jumpwave: configuration, table regeneration, error
//! sweeps and single-contract pricing on top of the approximation and
//! benchmark engines.

pub mod commands;
pub mod config;
pub mod error;
pub mod pricing;
pub mod reference;
pub mod sweep;
pub mod tables;

pub use commands::{
    cmd_benchmark, cmd_price, cmd_sweep, cmd_table, emit, init_threads, CommandOutput, Overrides,
};
pub use config::{parse_orders, RunConfig, SweepAxis};
pub use error::CliError;
pub use pricing::Contract;
pub use sweep::{run_sweep, SweepResult, SweepSpec};
pub use tables::{parse_table_csv, run_table, table_definition, TableOptions, TableResult};
