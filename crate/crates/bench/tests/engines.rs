use jumpwave_bench::{
    align_steps, fd_american_vanilla, tree_american_barrier, BenchError, FdGridSpec, TreeSpec,
    STRETCH_RANGE,
};
use jumpwave_european::{
    european_barrier, european_vanilla, BarrierDirection, BarrierSpec, OptionSpec, RebateRule, Side,
};
use jumpwave_model::ModelParams;

fn merton() -> ModelParams {
    ModelParams::merton(0.08, 0.12, 0.2, 2.5, 0.05, 0.03).unwrap()
}

fn fd(model: &ModelParams, side: Side, s0: f64, t: f64, grid: &FdGridSpec) -> f64 {
    let spec = OptionSpec::new(side, 100.0, t).unwrap();
    fd_american_vanilla(model, &spec, s0, t, grid)
        .unwrap()
        .price
}

fn doc() -> BarrierSpec {
    BarrierSpec {
        level: 40.0,
        direction: BarrierDirection::DownAndOut,
        rebate: RebateRule::Zero,
    }
}

fn uop() -> BarrierSpec {
    BarrierSpec {
        level: 50.0,
        direction: BarrierDirection::UpAndOut,
        rebate: RebateRule::Zero,
    }
}

fn reverse_uop() -> BarrierSpec {
    BarrierSpec {
        level: 49.0,
        direction: BarrierDirection::UpAndOut,
        rebate: RebateRule::IntrinsicAtBarrier,
    }
}

#[test]
fn fd_reproduces_printed_benchmarks() {
    let grid = FdGridSpec::default();
    let p = fd(&merton(), Side::Call, 100.0, 0.25, &grid);
    assert!((p - 3.939).abs() < 5e-3, "Merton call {p}");
    let constant = ModelParams::constant_jump(0.08, 0.12, 0.2, 2.5, 0.05).unwrap();
    let p = fd(&constant, Side::Call, 100.0, 0.25, &grid);
    assert!((p - 3.833).abs() < 5e-3, "constant-jump call {p}");
}

#[test]
fn fd_calls_without_dividends_are_european() {
    let model = ModelParams::merton(0.08, -0.02, 0.2, 2.5, 0.05, 0.03).unwrap();
    let spec = OptionSpec::new(Side::Call, 100.0, 0.5).unwrap();
    let r = fd_american_vanilla(&model, &spec, 105.0, 0.5, &FdGridSpec::default()).unwrap();
    let e = european_vanilla(&model, &spec, 105.0, 0.5).unwrap();
    assert!((r.price - e).abs() < 2e-3);
    assert_eq!(r.premium, 0.0);
}

/// Halving the space step (and with it the stable time step) shrinks the
/// change of the price at least at first order. The scheme is second order in
/// space; the exercise kink keeps the observed ratio near 0.3.
#[test]
fn fd_refinement_converges() {
    let model = merton();
    let prices: Vec<f64> = [201, 401, 801]
        .iter()
        .map(|&n| {
            fd(
                &model,
                Side::Put,
                95.0,
                0.5,
                &FdGridSpec {
                    n_space: n,
                    ..FdGridSpec::default()
                },
            )
        })
        .collect();
    let first = (prices[1] - prices[0]).abs();
    let second = (prices[2] - prices[1]).abs();
    assert!(second < 0.5 * first, "{prices:?}");
}

#[test]
fn fd_premium_respects_the_obstacle() {
    let model = merton();
    for (side, s0) in [(Side::Put, 60.0), (Side::Put, 100.0), (Side::Call, 100.0)] {
        let spec = OptionSpec::new(side, 100.0, 1.0).unwrap();
        let r = fd_american_vanilla(&model, &spec, s0, 1.0, &FdGridSpec::default()).unwrap();
        assert!(r.premium >= 0.0);
        assert!(r.price >= r.european);
        assert!(r.price >= side.intrinsic(s0, 100.0) - 1e-12);
    }
    let spec = OptionSpec::new(Side::Put, 100.0, 1.0).unwrap();
    let deep = fd_american_vanilla(&model, &spec, 50.0, 1.0, &FdGridSpec::default()).unwrap();
    assert!((deep.price - 50.0).abs() < 1e-9, "{}", deep.price);
}

#[test]
fn fd_rejects_bad_grids() {
    let model = merton();
    let spec = OptionSpec::new(Side::Put, 100.0, 1.0).unwrap();
    let coarse_time = FdGridSpec {
        n_time: Some(10),
        ..FdGridSpec::default()
    };
    assert!(matches!(
        fd_american_vanilla(&model, &spec, 100.0, 1.0, &coarse_time),
        Err(BenchError::UnstableGrid { .. })
    ));
    assert!(matches!(
        fd_american_vanilla(&model, &spec, 3.0, 1.0, &FdGridSpec::default()),
        Err(BenchError::OutOfDomain { .. })
    ));
    let tiny = FdGridSpec {
        n_space: 3,
        ..FdGridSpec::default()
    };
    assert!(fd_american_vanilla(&model, &spec, 100.0, 1.0, &tiny).is_err());
}

#[test]
fn tree_reproduces_printed_benchmarks() {
    let tree = TreeSpec::default();
    let model = ModelParams::black_scholes(0.0488, 0.025, 0.2).unwrap();
    let spec = OptionSpec::new(Side::Call, 45.0, 0.75).unwrap();
    let p = tree_american_barrier(&model, &spec, &doc(), 45.0, 0.75, &tree).unwrap();
    assert!((p - 3.100).abs() < 3e-3, "DOC {p}");

    let model = ModelParams::black_scholes(0.0488, 0.06, 0.2).unwrap();
    let spec = OptionSpec::new(Side::Put, 50.0, 0.5).unwrap();
    let p = tree_american_barrier(&model, &spec, &reverse_uop(), 40.0, 0.5, &tree).unwrap();
    assert!((p - 10.013).abs() < 3e-3, "reverse UOP {p}");
}

#[test]
fn tree_european_mode_matches_closed_form() {
    let tree = TreeSpec {
        american: false,
        ..TreeSpec::default()
    };
    let cases = [
        (Side::Call, 45.0, doc(), 0.025, 45.0),
        (Side::Put, 45.0, uop(), 0.025, 42.5),
        (Side::Put, 50.0, reverse_uop(), 0.06, 45.0),
    ];
    for (side, k, barrier, delta, s0) in cases {
        for sigma in [0.2, 0.4] {
            let model = ModelParams::black_scholes(0.0488, delta, sigma).unwrap();
            let spec = OptionSpec::new(side, k, 1.0).unwrap();
            let p = tree_american_barrier(&model, &spec, &barrier, s0, 1.0, &tree).unwrap();
            let e = european_barrier(&model, &spec, &barrier, s0, 1.0)
                .unwrap()
                .price;
            assert!(
                (p - e).abs() < 2e-3,
                "{side:?} sigma {sigma}: tree {p}, closed {e}"
            );
        }
    }
}

#[test]
fn tree_american_dominates_european() {
    let model = ModelParams::black_scholes(0.0488, 0.025, 0.3).unwrap();
    let spec = OptionSpec::new(Side::Put, 45.0, 1.0).unwrap();
    for s0 in [38.0, 42.5, 47.0] {
        let american =
            tree_american_barrier(&model, &spec, &uop(), s0, 1.0, &TreeSpec::default()).unwrap();
        let european = tree_american_barrier(
            &model,
            &spec,
            &uop(),
            s0,
            1.0,
            &TreeSpec {
                american: false,
                ..TreeSpec::default()
            },
        )
        .unwrap();
        assert!(american >= european);
        assert!(american >= 45.0 - s0);
    }
}

#[test]
fn tree_trivial_cases_and_rejections() {
    let model = ModelParams::black_scholes(0.0488, 0.06, 0.2).unwrap();
    let spec = OptionSpec::new(Side::Put, 50.0, 1.0).unwrap();
    let tree = TreeSpec::default();
    assert_eq!(
        tree_american_barrier(&model, &spec, &reverse_uop(), 49.5, 1.0, &tree).unwrap(),
        1.0
    );
    assert_eq!(
        tree_american_barrier(&model, &spec, &reverse_uop(), 42.0, 0.0, &tree).unwrap(),
        8.0
    );
    let jumps = merton();
    assert!(tree_american_barrier(&jumps, &spec, &reverse_uop(), 45.0, 1.0, &tree).is_err());
    let short = TreeSpec {
        n_steps: 50,
        ..tree
    };
    assert!(tree_american_barrier(&model, &spec, &reverse_uop(), 45.0, 1.0, &short).is_err());
}

#[test]
fn step_alignment_puts_a_layer_on_the_barrier() {
    for (d, sigma, tau) in [
        (0.0124, 0.4, 1.5),
        (0.01, 0.2, 1.5),
        (0.5, 0.2, 0.25),
        (1e-3, 0.3, 1.0),
    ] {
        let (n, m, k) = align_steps(d, sigma, tau, 5000).unwrap();
        assert!(n >= 5000);
        assert!((1.0..=STRETCH_RANGE.1).contains(&k), "stretch {k}");
        let dy = k * sigma * (tau / n as f64).sqrt();
        assert!((m as f64 * dy - d).abs() < 1e-12 * d.max(1.0));
    }
    // Far barriers keep the requested count.
    assert_eq!(align_steps(0.5, 0.2, 0.25, 5000).unwrap().0, 5000);
}

#[test]
fn spots_next_to_the_barrier_are_priced() {
    let european = TreeSpec {
        american: false,
        ..TreeSpec::default()
    };
    let model = ModelParams::black_scholes(0.0488, 0.025, 0.4).unwrap();
    let spec = OptionSpec::new(Side::Call, 45.0, 1.5).unwrap();
    let p = tree_american_barrier(&model, &spec, &doc(), 40.5, 1.5, &european).unwrap();
    let e = european_barrier(&model, &spec, &doc(), 40.5, 1.5)
        .unwrap()
        .price;
    assert!((p - e).abs() < 2e-3, "tree {p}, closed {e}");

    let model = ModelParams::black_scholes(0.0488, 0.025, 0.2).unwrap();
    let spec = OptionSpec::new(Side::Put, 45.0, 1.5).unwrap();
    let p = tree_american_barrier(&model, &spec, &uop(), 49.5, 1.5, &european).unwrap();
    let e = european_barrier(&model, &spec, &uop(), 49.5, 1.5)
        .unwrap()
        .price;
    assert!((p - e).abs() < 2e-3, "tree {p}, closed {e}");
}
