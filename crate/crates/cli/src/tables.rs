//! Regeneration of the seven validation tables.
//!
//! Each table has one or two blocks of 15 cells (three maturities times five
//! spots). Every cell is priced by the approximation of each requested order
//! and by the benchmark engine. Cells are dispatched to the rayon pool and
//! collected in cell order, so the CSV output does not depend on the thread
//! count.
//!
//! RMSE values are computed from the three-decimal figures that appear in the
//! CSV, so that re-reading an emitted table reproduces them exactly.

use jumpwave_bench::{FdGridSpec, TreeSpec};
use jumpwave_european::{BarrierDirection, BarrierSpec, RebateRule, Side};
use jumpwave_model::ModelParams;
use jumpwave_vanilla::PerturbationSettings;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::CliError;
use crate::pricing::Contract;
use crate::reference::{
    RefBlock, TABLE1, TABLE2, TABLE3, TABLE4, TABLE5, TABLE6_MODIFIED_QUADRATIC,
    TABLE6_MODIFIED_QUADRATIC_RMSE, TABLE7,
};

/// Identifiers accepted by `table`.
pub const TABLE_IDS: [u8; 7] = [1, 2, 3, 4, 5, 6, 7];

/// One block of a table.
#[derive(Debug, Clone)]
pub struct BlockDef {
    pub label: String,
    pub contract: Contract,
    pub maturities: [f64; 3],
    pub spots: [f64; 5],
    pub reference: RefBlock,
}

/// A printed column of another method, carried along for comparison.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub label: String,
    pub values: [f64; 15],
    pub printed_rmse: f64,
}

/// Definition of one table.
#[derive(Debug, Clone)]
pub struct TableDef {
    pub id: u8,
    pub title: String,
    pub blocks: Vec<BlockDef>,
    /// Extra printed column, only present for the comparison table.
    pub comparison: Option<Comparison>,
}

const VANILLA_MATURITIES: [f64; 3] = [0.25, 0.75, 1.5];
const REVERSE_MATURITIES: [f64; 3] = [0.5, 1.0, 1.5];
const BARRIER_RATE: f64 = 0.0488;

fn spots_of(block: &RefBlock) -> [f64; 5] {
    std::array::from_fn(|i| block.cells[i][0])
}

fn constant(delta: f64) -> ModelParams {
    ModelParams::constant_jump(0.08, delta, 0.2, 2.5, 0.05).expect("table parameters are valid")
}

fn merton(delta: f64) -> ModelParams {
    ModelParams::merton(0.08, delta, 0.2, 2.5, 0.05, 0.03).expect("table parameters are valid")
}

fn black_scholes(delta: f64, sigma: f64) -> ModelParams {
    ModelParams::black_scholes(BARRIER_RATE, delta, sigma).expect("table parameters are valid")
}

fn vanilla_block(label: &str, model: ModelParams, side: Side, reference: RefBlock) -> BlockDef {
    BlockDef {
        label: label.into(),
        contract: Contract {
            model,
            side,
            strike: 100.0,
            barrier: None,
        },
        maturities: VANILLA_MATURITIES,
        spots: spots_of(&reference),
        reference,
    }
}

fn doc_block(sigma: f64, reference: RefBlock) -> BlockDef {
    BlockDef {
        label: format!("sigma_{sigma}"),
        contract: Contract {
            model: black_scholes(0.025, sigma),
            side: Side::Call,
            strike: 45.0,
            barrier: Some(BarrierSpec {
                level: 40.0,
                direction: BarrierDirection::DownAndOut,
                rebate: RebateRule::Zero,
            }),
        },
        maturities: VANILLA_MATURITIES,
        spots: spots_of(&reference),
        reference,
    }
}

fn uop_block(sigma: f64, reference: RefBlock) -> BlockDef {
    BlockDef {
        label: format!("sigma_{sigma}"),
        contract: Contract {
            model: black_scholes(0.025, sigma),
            side: Side::Put,
            strike: 45.0,
            barrier: Some(BarrierSpec {
                level: 50.0,
                direction: BarrierDirection::UpAndOut,
                rebate: RebateRule::Zero,
            }),
        },
        maturities: VANILLA_MATURITIES,
        spots: spots_of(&reference),
        reference,
    }
}

fn reverse_uop_block(sigma: f64, reference: RefBlock) -> BlockDef {
    BlockDef {
        label: format!("sigma_{sigma}"),
        contract: Contract {
            model: black_scholes(0.06, sigma),
            side: Side::Put,
            strike: 50.0,
            barrier: Some(BarrierSpec {
                level: 49.0,
                direction: BarrierDirection::UpAndOut,
                rebate: RebateRule::IntrinsicAtBarrier,
            }),
        },
        maturities: REVERSE_MATURITIES,
        spots: spots_of(&reference),
        reference,
    }
}

/// Definition of table `id` in `1..=7`.
pub fn table_definition(id: u8) -> Result<TableDef, CliError> {
    let (title, blocks, comparison) = match id {
        1 => (
            "American calls, K = 100, r = 0.08, b = -0.04, sigma = 0.2, lambda = 2.5",
            vec![
                vanilla_block("constant_jump", constant(0.12), Side::Call, TABLE1[0]),
                vanilla_block("merton", merton(0.12), Side::Call, TABLE1[1]),
            ],
            None,
        ),
        2 => (
            "American options under Merton jumps, K = 100, r = 0.08, b = 0, sigma = 0.2, lambda = 2.5",
            vec![
                vanilla_block("call", merton(0.08), Side::Call, TABLE2[0]),
                vanilla_block("put", merton(0.08), Side::Put, TABLE2[1]),
            ],
            None,
        ),
        3 => (
            "American puts, K = 100, r = 0.08, b = 0.04, sigma = 0.2, lambda = 2.5",
            vec![
                vanilla_block("constant_jump", constant(0.04), Side::Put, TABLE3[0]),
                vanilla_block("merton", merton(0.04), Side::Put, TABLE3[1]),
            ],
            None,
        ),
        4 => (
            "American down-and-out calls, K = 45, L = 40, r = 0.0488, delta = 0.025",
            vec![doc_block(0.2, TABLE4[0]), doc_block(0.4, TABLE4[1])],
            None,
        ),
        5 => (
            "American up-and-out puts, K = 45, L = 50, r = 0.0488, delta = 0.025",
            vec![uop_block(0.2, TABLE5[0]), uop_block(0.4, TABLE5[1])],
            None,
        ),
        6 => (
            "American up-and-out puts, sigma = 0.2, against the modified quadratic approximation",
            vec![uop_block(0.2, TABLE5[0])],
            Some(Comparison {
                label: "modified_quadratic".into(),
                values: TABLE6_MODIFIED_QUADRATIC,
                printed_rmse: TABLE6_MODIFIED_QUADRATIC_RMSE,
            }),
        ),
        7 => (
            "American reverse up-and-out puts, K = 50, L = 49, r = 0.0488, delta = 0.06, rebate K - L",
            vec![
                reverse_uop_block(0.2, TABLE7[0]),
                reverse_uop_block(0.4, TABLE7[1]),
            ],
            None,
        ),
        other => {
            return Err(CliError::Config(format!(
                "unknown table {other}; choose one of 1 to 7"
            )))
        }
    };
    Ok(TableDef {
        id,
        title: title.into(),
        blocks,
        comparison,
    })
}

/// Engine settings for a table run.
#[derive(Debug, Clone, PartialEq)]
pub struct TableOptions {
    pub orders: Vec<usize>,
    /// Compute benchmarks; otherwise the printed benchmark column is used.
    pub benchmark: bool,
    pub settings: PerturbationSettings,
    pub fd: FdGridSpec,
    pub tree: TreeSpec,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            orders: vec![0, 1, 2, 3],
            benchmark: true,
            settings: PerturbationSettings::default(),
            fd: FdGridSpec::default(),
            tree: TreeSpec::default(),
        }
    }
}

/// Where the benchmark column comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkSource {
    FiniteDifference,
    TrinomialTree,
    Printed,
}

/// One priced cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    pub maturity: f64,
    pub spot: f64,
    pub european: f64,
    pub benchmark: f64,
    /// Price of each requested order.
    pub prices: Vec<f64>,
    pub comparison: Option<f64>,
    /// Some order used a closest-approach boundary.
    pub tangent_boundary: bool,
}

/// Result of one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockResult {
    pub label: String,
    pub rows: Vec<TableRow>,
    /// RMSE of each requested order against the benchmark column.
    pub rmse: Vec<f64>,
    /// Footer RMSE of each requested order as printed.
    pub printed_rmse: Vec<f64>,
    pub comparison_rmse: Option<f64>,
    /// Summed wall-clock time of each order's solves, in seconds.
    pub order_seconds: Vec<f64>,
    /// Summed wall-clock time of the benchmark solves, in seconds.
    pub benchmark_seconds: f64,
}

/// Result of a whole table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableResult {
    pub id: u8,
    pub title: String,
    pub orders: Vec<usize>,
    pub benchmark_source: BenchmarkSource,
    pub comparison_label: Option<String>,
    pub comparison_printed_rmse: Option<f64>,
    pub blocks: Vec<BlockResult>,
}

/// Rounds to the three decimals written to the CSV.
pub fn round3(x: f64) -> f64 {
    format!("{x:.3}").parse().expect("formatted float parses")
}

/// Root mean squared difference of two columns after rounding both to three
/// decimals.
pub fn rounded_rmse(values: &[f64], reference: &[f64]) -> f64 {
    let n = values.len().max(1) as f64;
    let sum: f64 = values
        .iter()
        .zip(reference)
        .map(|(v, r)| (round3(*v) - round3(*r)).powi(2))
        .sum();
    (sum / n).sqrt()
}

struct CellOutput {
    european: f64,
    benchmark: f64,
    benchmark_seconds: f64,
    prices: Vec<f64>,
    seconds: Vec<f64>,
    tangent: bool,
}

fn price_cell(
    block: &BlockDef,
    cell: usize,
    options: &TableOptions,
) -> Result<CellOutput, CliError> {
    let t = block.maturities[cell / 5];
    let s0 = block.spots[cell % 5];
    let mut prices = Vec::with_capacity(options.orders.len());
    let mut seconds = Vec::with_capacity(options.orders.len());
    let mut european = f64::NAN;
    let mut tangent = false;
    for &n in &options.orders {
        let clock = std::time::Instant::now();
        let report = block
            .contract
            .approximate(s0, t, n, &options.settings)
            .map_err(|e| annotate(e, block, t, s0))?;
        seconds.push(clock.elapsed().as_secs_f64());
        prices.push(report.price_at_order(n).unwrap_or(report.price));
        european = report.european;
        tangent |= report.flags.tangent_boundary;
    }
    let clock = std::time::Instant::now();
    let benchmark = if options.benchmark {
        block
            .contract
            .benchmark(s0, t, &options.fd, &options.tree)
            .map_err(|e| annotate(e, block, t, s0))?
    } else {
        block.reference.cells[cell][2]
    };
    Ok(CellOutput {
        european,
        benchmark,
        benchmark_seconds: clock.elapsed().as_secs_f64(),
        prices,
        seconds,
        tangent,
    })
}

fn annotate(e: CliError, block: &BlockDef, t: f64, s0: f64) -> CliError {
    let context = format!("block {}, T = {t}, S0 = {s0}: ", block.label);
    match e {
        CliError::Config(m) => CliError::Config(context + &m),
        CliError::Solver(m) => CliError::Solver(context + &m),
        CliError::Io(m) => CliError::Io(context + &m),
    }
}

/// Prices every cell of `table` on the current rayon pool.
pub fn run_table(table: &TableDef, options: &TableOptions) -> Result<TableResult, CliError> {
    crate::config::validate_orders(&options.orders)?;
    let jobs: Vec<(usize, usize)> = (0..table.blocks.len())
        .flat_map(|b| (0..15).map(move |c| (b, c)))
        .collect();
    let outputs: Vec<CellOutput> = jobs
        .par_iter()
        .map(|&(b, c)| price_cell(&table.blocks[b], c, options))
        .collect::<Result<_, _>>()?;

    let mut blocks = Vec::with_capacity(table.blocks.len());
    for (b, def) in table.blocks.iter().enumerate() {
        let cells = &outputs[15 * b..15 * (b + 1)];
        let rows: Vec<TableRow> = cells
            .iter()
            .enumerate()
            .map(|(c, out)| TableRow {
                maturity: def.maturities[c / 5],
                spot: def.spots[c % 5],
                european: out.european,
                benchmark: out.benchmark,
                prices: out.prices.clone(),
                comparison: table.comparison.as_ref().map(|cmp| cmp.values[c]),
                tangent_boundary: out.tangent,
            })
            .collect();
        let bench: Vec<f64> = rows.iter().map(|r| r.benchmark).collect();
        let rmse = (0..options.orders.len())
            .map(|k| {
                let column: Vec<f64> = rows.iter().map(|r| r.prices[k]).collect();
                rounded_rmse(&column, &bench)
            })
            .collect();
        let comparison_rmse = table
            .comparison
            .as_ref()
            .map(|cmp| rounded_rmse(&cmp.values, &bench));
        blocks.push(BlockResult {
            label: def.label.clone(),
            rmse,
            printed_rmse: options
                .orders
                .iter()
                .map(|&n| def.reference.rmse[n])
                .collect(),
            comparison_rmse,
            order_seconds: (0..options.orders.len())
                .map(|k| cells.iter().map(|o| o.seconds[k]).sum())
                .collect(),
            benchmark_seconds: cells.iter().map(|o| o.benchmark_seconds).sum(),
            rows,
        });
    }
    let benchmark_source = match (options.benchmark, table.blocks[0].contract.barrier) {
        (false, _) => BenchmarkSource::Printed,
        (true, None) => BenchmarkSource::FiniteDifference,
        (true, Some(_)) => BenchmarkSource::TrinomialTree,
    };
    Ok(TableResult {
        id: table.id,
        title: table.title.clone(),
        orders: options.orders.clone(),
        benchmark_source,
        comparison_label: table.comparison.as_ref().map(|c| c.label.clone()),
        comparison_printed_rmse: table.comparison.as_ref().map(|c| c.printed_rmse),
        blocks,
    })
}

/// Header of the table CSV.
pub fn csv_header(result: &TableResult) -> Vec<String> {
    let mut header: Vec<String> = ["block", "maturity", "spot", "european", "benchmark"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(result.orders.iter().map(|n| format!("n{n}")));
    if let Some(label) = &result.comparison_label {
        header.push(label.clone());
    }
    header
}

/// Writes the table as CSV: one row per cell with prices to three decimals,
/// then one `rmse` row per block at full precision. No timing is written, so
/// identical inputs give identical bytes.
pub fn table_csv(result: &TableResult) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(csv_header(result)).map_err(io)?;
    for block in &result.blocks {
        for row in &block.rows {
            let mut rec = vec![
                block.label.clone(),
                format!("{}", row.maturity),
                format!("{}", row.spot),
                format!("{:.3}", row.european),
                format!("{:.3}", row.benchmark),
            ];
            rec.extend(row.prices.iter().map(|p| format!("{p:.3}")));
            if let Some(c) = row.comparison {
                rec.push(format!("{c:.3}"));
            }
            w.write_record(&rec).map_err(io)?;
        }
        let mut rec = vec![
            block.label.clone(),
            "rmse".into(),
            String::new(),
            String::new(),
            String::new(),
        ];
        rec.extend(block.rmse.iter().map(|r| format!("{r}")));
        if let Some(c) = block.comparison_rmse {
            rec.push(format!("{c}"));
        }
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

/// A block read back from a table CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedBlock {
    pub label: String,
    /// Benchmark column.
    pub benchmark: Vec<f64>,
    /// Approximation columns followed by the comparison column, if any.
    pub columns: Vec<Vec<f64>>,
    /// RMSE row, one entry per column.
    pub stated_rmse: Vec<f64>,
}

impl ParsedBlock {
    /// RMSE of every column recomputed from the cell rows.
    pub fn recomputed_rmse(&self) -> Vec<f64> {
        self.columns
            .iter()
            .map(|c| rounded_rmse(c, &self.benchmark))
            .collect()
    }
}

/// Reads a CSV written by [`table_csv`].
pub fn parse_table_csv(text: &str) -> Result<Vec<ParsedBlock>, CliError> {
    let bad = |m: String| CliError::Config(format!("table CSV: {m}"));
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.len() < 6 || &header[4] != "benchmark" {
        return Err(bad("unexpected header".into()));
    }
    let width = header.len() - 5;
    let num = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| bad(format!("not a number: `{s}`")))
    };
    let mut blocks: Vec<ParsedBlock> = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let label = &rec[0];
        if blocks.last().map_or(true, |b| b.label != label) {
            blocks.push(ParsedBlock {
                label: label.into(),
                benchmark: Vec::new(),
                columns: vec![Vec::new(); width],
                stated_rmse: Vec::new(),
            });
        }
        let block = blocks.last_mut().expect("a block was pushed");
        let values: Vec<f64> = (5..rec.len())
            .map(|i| num(&rec[i]))
            .collect::<Result<_, _>>()?;
        if &rec[1] == "rmse" {
            block.stated_rmse = values;
        } else {
            block.benchmark.push(num(&rec[4])?);
            for (col, v) in block.columns.iter_mut().zip(values) {
                col.push(v);
            }
        }
    }
    Ok(blocks)
}

/// Plain-text summary: RMSE per order against the printed footers and the
/// wall-clock time per order column.
pub fn table_summary(result: &TableResult) -> String {
    let mut out = format!("table {}: {}\n", result.id, result.title);
    let source = match result.benchmark_source {
        BenchmarkSource::FiniteDifference => "finite differences",
        BenchmarkSource::TrinomialTree => "trinomial tree",
        BenchmarkSource::Printed => "printed column",
    };
    out += &format!("benchmark: {source}\n");
    let orders: String = result
        .orders
        .iter()
        .map(|n| format!("{:>11}", format!("N={n}")))
        .collect();
    for block in &result.blocks {
        out += &format!("block {}\n", block.label);
        out += &format!("  {:<14}{orders}\n", "");
        let line = |name: &str, v: &[f64], prec: usize| {
            let cells: String = v.iter().map(|x| format!("{x:>11.prec$}")).collect();
            format!("  {name:<14}{cells}\n")
        };
        out += &line("rmse", &block.rmse, 5);
        out += &line("printed rmse", &block.printed_rmse, 5);
        out += &line("seconds", &block.order_seconds, 3);
        if let (Some(rmse), Some(printed), Some(label)) = (
            block.comparison_rmse,
            result.comparison_printed_rmse,
            &result.comparison_label,
        ) {
            out += &format!("  {label}: rmse {rmse:.5}, printed {printed:.5}\n");
        }
        if result.benchmark_source != BenchmarkSource::Printed {
            out += &format!("  benchmark seconds {:.3}\n", block.benchmark_seconds);
        }
        let tangent = block.rows.iter().filter(|r| r.tangent_boundary).count();
        if tangent > 0 {
            out += &format!("  cells with a closest-approach boundary: {tangent}\n");
        }
    }
    out
}
