use jumpwave_european::{
    european_vanilla, european_vanilla_delta, european_vanilla_gamma, european_vanilla_greeks,
    european_vanilla_theta, OptionSpec, Side,
};
use jumpwave_model::ModelParams;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sampling::{poisson, standard_normal};

/// Poisson and normal samplers for the Monte Carlo checks.
mod sampling {
    use rand::Rng;

    pub fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
        // Box-Muller; the second variate is dropped to keep the stream simple.
        let u1: f64 = 1.0 - rng.gen::<f64>();
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn poisson<R: Rng>(rng: &mut R, mean: f64) -> u32 {
        let limit = (-mean).exp();
        let mut n = 0;
        let mut p: f64 = rng.gen();
        while p > limit {
            n += 1;
            p *= rng.gen::<f64>();
        }
        n
    }
}

fn constant() -> ModelParams {
    ModelParams::constant_jump(0.08, 0.12, 0.2, 2.5, 0.05).unwrap()
}

fn merton(delta: f64) -> ModelParams {
    ModelParams::merton(0.08, delta, 0.2, 2.5, 0.05, 0.03).unwrap()
}

fn call(t: f64) -> OptionSpec {
    OptionSpec::new(Side::Call, 100.0, t).unwrap()
}

fn put(t: f64) -> OptionSpec {
    OptionSpec::new(Side::Put, 100.0, t).unwrap()
}

/// Printed values carry three decimals; the Merton call sits at 3.8205.
#[test]
fn reference_european_prices() {
    let p = european_vanilla(&constant(), &call(0.25), 100.0, 0.25).unwrap();
    assert!((p - 3.719).abs() < 1e-3, "{p}");
    let p = european_vanilla(&merton(0.12), &call(0.25), 100.0, 0.25).unwrap();
    assert!((p - 3.821).abs() < 1e-3, "{p}");
    let p = european_vanilla(&merton(0.08), &put(0.25), 100.0, 0.25).unwrap();
    assert!((p - 4.304).abs() < 1e-3, "{p}");
}

#[test]
fn zero_maturity_is_intrinsic() {
    assert_eq!(
        european_vanilla(&merton(0.12), &call(1.0), 120.0, 0.0).unwrap(),
        20.0
    );
    assert_eq!(
        european_vanilla(&merton(0.12), &put(1.0), 120.0, 0.0).unwrap(),
        0.0
    );
}

#[test]
fn deep_in_the_money_delta_is_bounded() {
    let m = ModelParams::black_scholes(0.05, 0.0, 0.05).unwrap();
    let d = european_vanilla_delta(&m, &call(0.5), 1000.0, 0.5).unwrap();
    assert!((0.95..=1.0).contains(&d), "{d}");
}

#[test]
fn greeks_match_finite_differences() {
    let models = [
        constant(),
        merton(0.04),
        ModelParams::black_scholes(0.08, 0.04, 0.2).unwrap(),
    ];
    for m in &models {
        for spec in [call(1.0), put(1.0)] {
            for &s in &[80.0, 100.0, 125.0] {
                let t = 0.75;
                let g = european_vanilla_greeks(m, &spec, s, t).unwrap();
                let hs = 1e-4 * s;
                let price = |s: f64, t: f64| european_vanilla(m, &spec, s, t).unwrap();
                let delta = |s: f64, t: f64| european_vanilla_delta(m, &spec, s, t).unwrap();
                let fd_delta = (price(s + hs, t) - price(s - hs, t)) / (2.0 * hs);
                let fd_gamma =
                    (price(s + hs, t) - 2.0 * price(s, t) + price(s - hs, t)) / (hs * hs);
                let ht = 1e-5;
                let fd_theta = (price(s, t + ht) - price(s, t - ht)) / (2.0 * ht);
                let fd_cross = (delta(s, t + ht) - delta(s, t - ht)) / (2.0 * ht);
                assert!(
                    ((g.delta - fd_delta) / g.delta).abs() < 1e-6,
                    "delta {g:?} {fd_delta}"
                );
                assert!(
                    ((g.gamma - fd_gamma) / g.gamma).abs() < 1e-4,
                    "gamma {g:?} {fd_gamma}"
                );
                assert!(
                    (g.theta - fd_theta).abs() < 1e-6 * (1.0 + g.theta.abs()),
                    "theta {g:?} {fd_theta}"
                );
                assert!(
                    (g.delta_theta - fd_cross).abs() < 1e-6 * (1.0 + g.delta_theta.abs()),
                    "cross {g:?} {fd_cross}"
                );
                assert_eq!(european_vanilla_gamma(m, &spec, s, t).unwrap(), g.gamma);
                assert_eq!(european_vanilla_theta(m, &spec, s, t).unwrap(), g.theta);
            }
        }
    }
}

#[test]
fn zero_jump_series_equals_black_scholes() {
    let bs = ModelParams::black_scholes(0.08, 0.12, 0.2).unwrap();
    let cj = ModelParams::constant_jump(0.08, 0.12, 0.2, 2.5, 0.0).unwrap();
    for &t in &[0.25, 0.75, 1.5] {
        for &s in &[80.0, 90.0, 100.0, 110.0, 120.0] {
            for spec in [call(t), put(t)] {
                let a = european_vanilla(&bs, &spec, s, t).unwrap();
                let b = european_vanilla(&cj, &spec, s, t).unwrap();
                assert!((a - b).abs() < 1e-10, "{a} {b}");
            }
        }
    }
}

#[test]
fn narrow_merton_jumps_approach_constant_jumps() {
    let cj = ModelParams::constant_jump(0.08, 0.12, 0.2, 2.5, 0.05).unwrap();
    let mm = ModelParams::merton(0.08, 0.12, 0.2, 2.5, 0.05, 1e-4).unwrap();
    for &s in &[80.0, 100.0, 120.0] {
        let a = european_vanilla(&cj, &call(0.75), s, 0.75).unwrap();
        let b = european_vanilla(&mm, &call(0.75), s, 0.75).unwrap();
        assert!((a - b).abs() < 1e-4);
    }
}

#[test]
fn put_call_parity_against_monte_carlo_forward() {
    let m = merton(0.04);
    let (s, t) = (100.0, 0.75);
    let c = european_vanilla(&m, &call(t), s, t).unwrap();
    let p = european_vanilla(&m, &put(t), s, t).unwrap();
    let k = 100.0;

    // Monte Carlo of the discounted terminal asset value.
    let mut rng = ChaCha20Rng::seed_from_u64(7);
    let n = 1_000_000;
    let drift = m.log_drift() * t;
    let vol = m.sigma * t.sqrt();
    let (mut sum, mut sum2) = (0.0, 0.0);
    for _ in 0..n {
        let jumps = poisson(&mut rng, m.lambda * t);
        let mut x = drift + vol * standard_normal(&mut rng);
        for _ in 0..jumps {
            x += 0.05 + 0.03 * standard_normal(&mut rng);
        }
        let v = (-m.r * t).exp() * s * x.exp();
        sum += v;
        sum2 += v * v;
    }
    let mean = sum / f64::from(n);
    let se = ((sum2 / f64::from(n) - mean * mean) / f64::from(n)).sqrt();
    let parity = c - p + k * (-m.r * t).exp();
    assert!(
        (parity - mean).abs() < 3.0 * se,
        "{parity} vs {mean} +- {se}"
    );
    // The closed form of the same forward is exact.
    assert!((parity - s * (-m.delta * t).exp()).abs() < 1e-10);
}

#[test]
fn prices_are_non_negative_on_a_grid() {
    for m in [constant(), merton(0.12), merton(0.04)] {
        for &t in &[0.01, 0.5, 3.0, 10.0] {
            for k in 1..40 {
                let s = 5.0 * f64::from(k);
                assert!(european_vanilla(&m, &call(t), s, t).unwrap() >= 0.0);
                assert!(european_vanilla(&m, &put(t), s, t).unwrap() >= 0.0);
            }
        }
    }
}
