use bipedlab::env::config::RandomizationConfig;
use bipedlab::env::randomization::{truncated_gaussian, RandomizationDraw};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const N: usize = 100_000;

fn mean_var(v: &[f64]) -> (f64, f64) {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / v.len() as f64;
    (m, var)
}

// Variance ratio of a standard normal truncated at ±1: 1 - 2 pdf(1) / (2 cdf(1) - 1).
fn truncated_unit_variance() -> f64 {
    let pdf1 = (-0.5f64).exp() / (2.0 * std::f64::consts::PI).sqrt();
    // cdf(1) - cdf(-1) by Simpson's rule on the density
    let n = 2000;
    let h = 2.0 / n as f64;
    let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut s = f(-1.0) + f(1.0);
    for i in 1..n {
        let x = -1.0 + i as f64 * h;
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    let mass = s * h / 3.0;
    1.0 - 2.0 * pdf1 / mass
}

#[test]
fn every_draw_in_range_with_expected_moments() {
    let cfg = RandomizationConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let draws: Vec<_> = (0..N).map(|_| RandomizationDraw::sample(&mut rng, &cfg)).collect();

    let friction: Vec<f64> = draws.iter().map(|d| d.friction).collect();
    let strength: Vec<f64> = draws.iter().map(|d| d.motor_strength).collect();
    let payload: Vec<f64> = draws.iter().map(|d| d.payload).collect();
    assert!(friction.iter().all(|f| (0.1..=2.0).contains(f)));
    assert!(strength.iter().all(|f| (0.95..=1.05).contains(f)));
    assert!(payload.iter().all(|f| (-5.0..=5.0).contains(f)));
    assert!(draws.iter().all(|d| d.delay_ticks <= 10));

    let (m, v) = mean_var(&friction);
    assert!((m - 1.05).abs() < 0.01, "friction mean {m}");
    assert!((v - 1.9f64.powi(2) / 12.0).abs() < 0.01, "friction var {v}");

    let ratio = truncated_unit_variance();
    let (m, v) = mean_var(&payload);
    assert!(m.abs() < 0.03, "payload mean {m}");
    assert!((v / 25.0 - ratio).abs() < 0.01, "payload var {v}");
    let (m, v) = mean_var(&strength);
    assert!((m - 1.0).abs() < 3e-4, "strength mean {m}");
    assert!((v / 0.05f64.powi(2) - ratio).abs() < 0.01);

    let mut hist = [0usize; 11];
    for d in &draws {
        hist[d.delay_ticks] += 1;
    }
    for (k, &c) in hist.iter().enumerate() {
        let p = if k == 0 || k == 10 { 0.05 } else { 0.1 };
        let got = c as f64 / N as f64;
        assert!((got - p).abs() < 0.005, "delay {k} frequency {got}");
    }
}

#[test]
fn noise_is_symmetric_and_bounded() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v: Vec<f64> = (0..N).map(|_| truncated_gaussian(&mut rng, [-0.05, 0.05])).collect();
    assert!(v.iter().all(|x| x.abs() <= 0.05));
    let (m, _) = mean_var(&v);
    assert!(m.abs() < 3e-4);
}
