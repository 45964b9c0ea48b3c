use std::path::PathBuf;
use std::process::Command;

use jumpwave_cli::commands::{cmd_price, cmd_sweep, cmd_table, Overrides};
use jumpwave_cli::config::{parse_orders, RunConfig, SweepAxis};
use jumpwave_cli::sweep::{SweepBase, SweepSpec};
use jumpwave_cli::tables::{parse_table_csv, run_table, table_csv, table_definition, TableOptions};
use jumpwave_cli::CliError;
use jumpwave_model::JumpSpec;

fn repo_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn no_benchmark() -> TableOptions {
    TableOptions {
        benchmark: false,
        ..TableOptions::default()
    }
}

const MERTON_CALL: &str = r#"
[model]
r = 0.08
b = -0.04
sigma = 0.2
lambda = 2.5
jump = { kind = "normal", mu = 0.05, sigma = 0.03 }

[contract]
side = "call"
strike = 100.0

[scenario]
spots = [110.0]
maturities = [0.25]
"#;

#[test]
fn shipped_configs_parse() {
    let dir = repo_root().join("configs");
    let mut count = 0;
    for entry in std::fs::read_dir(&dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().and_then(|e| e.to_str()) == Some("toml") {
            RunConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            count += 1;
        }
    }
    assert!(count >= 5, "only {count} configs in {}", dir.display());
}

#[test]
fn carry_and_dividend_yield_are_exclusive() {
    let both = MERTON_CALL.replace("b = -0.04", "b = -0.04\ndelta = 0.12");
    assert!(matches!(
        RunConfig::from_toml(&both),
        Err(CliError::Config(_))
    ));
    let neither = MERTON_CALL.replace("b = -0.04\n", "");
    assert!(matches!(
        RunConfig::from_toml(&neither),
        Err(CliError::Config(_))
    ));
    let config = RunConfig::from_toml(MERTON_CALL).unwrap();
    let model = config.require_model().unwrap();
    assert!((model.delta - 0.12).abs() < 1e-15);
    assert_eq!(
        model.jump,
        JumpSpec::Normal {
            mu: 0.05,
            sigma: 0.03
        }
    );
}

#[test]
fn unknown_keys_are_rejected_everywhere() {
    for (from, to) in [
        ("sigma = 0.2", "sigma = 0.2\nvol = 0.2"),
        ("strike = 100.0", "strike = 100.0\nnotional = 1.0"),
        ("maturities = [0.25]", "maturities = [0.25]\nseed = 1"),
        (
            "jump = { kind = \"normal\", mu = 0.05, sigma = 0.03 }",
            "jump = { kind = \"normal\", mu = 0.05, sigma = 0.03, nu = 1.0 }",
        ),
    ] {
        let text = MERTON_CALL.replace(from, to);
        assert!(
            matches!(RunConfig::from_toml(&text), Err(CliError::Config(_))),
            "accepted {to}"
        );
    }
    let extra_block = format!("{MERTON_CALL}\n[plot]\ncolor = \"red\"\n");
    assert!(RunConfig::from_toml(&extra_block).is_err());
    let bad_numerics = format!("{MERTON_CALL}\n[numerics]\nstencil = 0.01\n");
    assert!(RunConfig::from_toml(&bad_numerics).is_err());
    let bad_fd = format!("{MERTON_CALL}\n[numerics]\nfd = {{ nodes = 3 }}\n");
    assert!(RunConfig::from_toml(&bad_fd).is_err());
}

#[test]
fn partial_numerics_keep_the_other_defaults() {
    let text =
        format!("{MERTON_CALL}\n[numerics]\nfd = {{ n_space = 401 }}\ntangent_fallback = false\n");
    let config = RunConfig::from_toml(&text).unwrap();
    assert_eq!(config.numerics.fd.n_space, 401);
    assert_eq!(config.numerics.fd.x_max, 3.0);
    assert!(!config.numerics.tangent_fallback);
    assert_eq!(config.numerics.stencil_step, 5e-3);
    assert_eq!(config.numerics.tree.n_steps, 5000);
}

#[test]
fn invalid_values_are_configuration_errors() {
    for (from, to) in [
        ("spots = [110.0]", "spots = [-1.0]"),
        ("maturities = [0.25]", "maturities = [0.25]\norders = [4]"),
        (
            "maturities = [0.25]",
            "maturities = [0.25]\norders = [1, 1]",
        ),
        ("sigma = 0.2", "sigma = -0.2"),
        ("strike = 100.0", "strike = 0.0"),
    ] {
        let text = MERTON_CALL.replace(from, to);
        assert!(
            matches!(RunConfig::from_toml(&text), Err(CliError::Config(_))),
            "accepted {to}"
        );
    }
}

#[test]
fn order_lists_in_every_form() {
    assert_eq!(parse_orders("3").unwrap(), vec![3]);
    assert_eq!(parse_orders("0,2").unwrap(), vec![0, 2]);
    assert_eq!(parse_orders("0..3").unwrap(), vec![0, 1, 2, 3]);
    assert_eq!(parse_orders("1..=2").unwrap(), vec![1, 2]);
    for bad in ["", "4", "0..4", "3..1", "a", "1,1"] {
        assert!(parse_orders(bad).is_err(), "accepted `{bad}`");
    }
}

#[test]
fn table_csv_round_trip_reproduces_rmse() {
    for id in [1, 4, 6] {
        let result = run_table(&table_definition(id).unwrap(), &no_benchmark()).unwrap();
        let csv = table_csv(&result).unwrap();
        let parsed = parse_table_csv(&csv).unwrap();
        assert_eq!(parsed.len(), result.blocks.len());
        for (block, parsed) in result.blocks.iter().zip(&parsed) {
            assert_eq!(parsed.label, block.label);
            assert_eq!(parsed.benchmark.len(), 15);
            let recomputed = parsed.recomputed_rmse();
            let mut stated = block.rmse.clone();
            stated.extend(block.comparison_rmse);
            assert_eq!(parsed.stated_rmse.len(), stated.len());
            for ((r, s), p) in recomputed.iter().zip(&stated).zip(&parsed.stated_rmse) {
                assert!((r - s).abs() <= 1e-12, "table {id}: {r} vs {s}");
                assert!((p - s).abs() <= 1e-12, "table {id}: {p} vs {s}");
            }
        }
    }
}

#[test]
fn table_output_does_not_depend_on_the_thread_count() {
    let table = table_definition(3).unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| table_csv(&run_table(&table, &no_benchmark()).unwrap()).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(1));
}

#[test]
fn table_command_honours_order_and_benchmark_overrides() {
    let overrides = Overrides {
        orders: Some(vec![0]),
        no_benchmark: true,
        ..Overrides::default()
    };
    let out = cmd_table(7, &RunConfig::default(), &overrides).unwrap();
    let header = out.data.lines().next().unwrap();
    assert_eq!(header, "block,maturity,spot,european,benchmark,n0");
    assert_eq!(out.data.lines().count(), 1 + 2 * 16);
    assert!(out.summary.contains("printed column"));
    let json = cmd_table(
        7,
        &RunConfig::default(),
        &Overrides {
            json: true,
            ..overrides
        },
    )
    .unwrap();
    let value: serde_json::Value = serde_json::from_str(&json.data).unwrap();
    assert_eq!(value["blocks"].as_array().unwrap().len(), 2);
    assert!(cmd_table(8, &RunConfig::default(), &Overrides::default()).is_err());
}

fn price_rows(text: &str) -> Vec<serde_json::Value> {
    let config = RunConfig::from_toml(text).unwrap();
    let out = cmd_price(
        &config,
        &Overrides {
            json: true,
            ..Overrides::default()
        },
    )
    .unwrap();
    serde_json::from_str(&out.data).unwrap()
}

#[test]
fn price_reproduces_a_printed_cell() {
    let rows = price_rows(MERTON_CALL);
    assert_eq!(rows.len(), 4);
    let n3 = &rows[3];
    assert_eq!(n3["order"], 3);
    let price = n3["price"].as_f64().unwrap();
    assert!((price - 10.583).abs() < 0.01, "{price}");
    for row in &rows {
        let european = row["european"].as_f64().unwrap();
        let sum: f64 = row["premium_by_order"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_f64().unwrap())
            .sum();
        assert!((european + sum - row["price"].as_f64().unwrap()).abs() <= 1e-12);
    }
}

#[test]
fn calls_without_dividends_price_as_european() {
    let text = MERTON_CALL.replace("b = -0.04", "b = 0.09");
    for row in price_rows(&text) {
        assert_eq!(row["price"], row["european"]);
        assert_eq!(row["premium_negligible"], true);
    }
}

#[test]
fn price_is_continuous_at_the_boundary() {
    let text = MERTON_CALL.replace("spots = [110.0]", "spots = [100.0]");
    let rows = price_rows(&text);
    let boundary = rows[3]["boundary"].as_f64().unwrap();
    let at = MERTON_CALL.replace("spots = [110.0]", &format!("spots = [{boundary:?}]"));
    let rows = price_rows(&at);
    let price = rows[3]["price"].as_f64().unwrap();
    assert!(
        (price - (boundary - 100.0)).abs() < 1e-6,
        "{price} at {boundary}"
    );
    let inside = MERTON_CALL.replace(
        "spots = [110.0]",
        &format!("spots = [{:?}]", boundary * (1.0 - 1e-9)),
    );
    let below = price_rows(&inside)[3]["price"].as_f64().unwrap();
    assert!((below - price).abs() < 1e-6);
}

#[test]
fn price_csv_is_deterministic() {
    let config = RunConfig::from_toml(MERTON_CALL).unwrap();
    let a = cmd_price(&config, &Overrides::default()).unwrap();
    let b = cmd_price(&config, &Overrides::default()).unwrap();
    assert_eq!(a.data, b.data);
    assert!(a
        .data
        .starts_with("spot,maturity,order,price,european,premium,boundary"));
}

#[test]
fn sweep_grid_and_axis_changes() {
    let mut spec = SweepSpec::new(SweepAxis::Lambda);
    spec.from = 0.0;
    spec.to = 20.0;
    spec.points = 5;
    assert_eq!(spec.values(), vec![0.0, 5.0, 10.0, 15.0, 20.0]);
    assert_eq!(spec.point(10.0).unwrap().contract.model.lambda, 10.0);
    spec.axis = SweepAxis::JumpSize;
    assert_eq!(
        spec.point(-0.2).unwrap().contract.model.jump,
        JumpSpec::Normal {
            mu: -0.2,
            sigma: 0.03
        }
    );
    spec.axis = SweepAxis::Sigma;
    assert!(spec.point(-0.1).is_err());
    spec.base = SweepBase::default_barrier();
    spec.axis = SweepAxis::Lambda;
    assert!(spec.point(1.0).is_err());
}

#[test]
fn small_sweep_runs_end_to_end() {
    let text = r#"
[numerics]
fd = { n_space = 201 }
tree = { n_steps = 500 }

[sweep]
from = 0.5
to = 1.0
points = 2
"#;
    let config = RunConfig::from_toml(text).unwrap();
    let out = cmd_sweep(Some(SweepAxis::Maturity), &config, &Overrides::default()).unwrap();
    let lines: Vec<&str> = out.data.lines().collect();
    assert_eq!(lines[0], "maturity,err_n0,err_n1,err_n2,err_n3");
    assert_eq!(lines.len(), 3);
    assert!(lines[2].starts_with("1,"));
    assert!(cmd_sweep(None, &config, &Overrides::default()).is_err());
    let no_bench = Overrides {
        no_benchmark: true,
        ..Overrides::default()
    };
    assert!(matches!(
        cmd_sweep(Some(SweepAxis::Maturity), &config, &no_bench),
        Err(CliError::Config(_))
    ));
}

fn jumpwave(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_jumpwave"))
        .args(args)
        .env_remove("JUMPWAVE_THREADS")
        .output()
        .unwrap()
}

fn write_temp(name: &str, text: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("jumpwave-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn exit_codes_distinguish_configuration_and_solver_failures() {
    let ok = write_temp("ok.toml", MERTON_CALL);
    let run = jumpwave(&[
        "price",
        "--config",
        ok.to_str().unwrap(),
        "--orders",
        "0..3",
    ]);
    assert!(
        run.status.success(),
        "{}",
        String::from_utf8_lossy(&run.stderr)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout).lines().count(), 5);

    let bad = write_temp(
        "bad.toml",
        &MERTON_CALL.replace("b = -0.04", "b = -0.04\ndelta = 0.1"),
    );
    let run = jumpwave(&["price", "--config", bad.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("configuration error"));

    let run = jumpwave(&["price", "--config", ok.to_str().unwrap(), "--orders", "5"]);
    assert_eq!(run.status.code(), Some(2));
    let run = jumpwave(&["price", "--config", "/nonexistent/jumpwave.toml"]);
    assert_eq!(run.status.code(), Some(2));
    let run = jumpwave(&["table", "9"]);
    assert_eq!(run.status.code(), Some(2));

    // A short-dated put under pure diffusion has no root in the order-one
    // boundary equation; with the fallback disabled the solver fails.
    let short = r#"
[model]
r = 0.0488
delta = 0.0
sigma = 0.3

[contract]
side = "put"
strike = 100.0

[scenario]
spots = [100.0]
maturities = [0.01]

[numerics]
tangent_fallback = false
"#;
    let solver = write_temp("solver.toml", short);
    let run = jumpwave(&["price", "--config", solver.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(3));
    let message = String::from_utf8_lossy(&run.stderr);
    assert!(message.contains("free-boundary equation"), "{message}");

    let out = std::env::temp_dir().join(format!("jumpwave-{}-out.csv", std::process::id()));
    let run = jumpwave(&[
        "table",
        "4",
        "--no-benchmark",
        "--threads",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success());
    assert!(String::from_utf8_lossy(&run.stdout).contains("block sigma_0.2"));
    let written = std::fs::read_to_string(&out).unwrap();
    assert!(written.starts_with("block,maturity,spot"));

    let run = Command::new(env!("CARGO_BIN_EXE_jumpwave"))
        .args(["table", "4", "--no-benchmark"])
        .env("JUMPWAVE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(run.status.code(), Some(2));

    for path in [ok, bad, solver, out] {
        let _ = std::fs::remove_file(path);
    }
}
