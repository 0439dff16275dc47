//! Monte-Carlo and generate-and-check oracles for the statistical operators.
//! Each returns the raw measurement; callers apply the bound.

use tsr_core::rng::{gaussian_vec, random_walk, seeded};
use tsr_core::stats::{causal_matrix, decompose, stat_test, TestKind};
use tsr_core::{Frame, TimeSeries};

pub const SEEDS: u64 = 200;

pub fn frame(cols: Vec<(&str, Vec<f64>)>) -> Frame {
    Frame::new(
        cols.into_iter()
            .map(|(n, v)| TimeSeries::from_values(n, v).unwrap())
            .collect(),
    )
    .unwrap()
}

/// Random walks (n=500) judged non-stationary by ADF.
pub fn adf_random_walk_hits() -> usize {
    (0..SEEDS)
        .filter(|&s| {
            let w = random_walk(&mut seeded(1000 + s), 500, 1.0);
            !stat_test(TestKind::Adf, &w, None, None).unwrap().verdict
        })
        .count()
}

/// iid noise (n=500, 10 lags) judged white by Ljung-Box.
pub fn ljung_box_white_noise_hits() -> usize {
    (0..SEEDS)
        .filter(|&s| {
            let e = gaussian_vec(&mut seeded(2000 + s), 500, 1.0);
            stat_test(TestKind::LjungBox, &e, None, Some(10)).unwrap().verdict
        })
        .count()
}

/// iid noise (n=500) judged trend-stationary by KPSS.
pub fn kpss_white_noise_hits() -> usize {
    (0..SEEDS)
        .filter(|&s| {
            let e = gaussian_vec(&mut seeded(3000 + s), 500, 1.0);
            stat_test(TestKind::Kpss, &e, None, None).unwrap().verdict
        })
        .count()
}

/// `y_t = 0.8 x_{t-1} + e_t` with iid `x` and `e`.
pub fn lagged_pair(seed: u64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut rng = seeded(seed);
    let x = gaussian_vec(&mut rng, n, 1.0);
    let e = gaussian_vec(&mut rng, n, 1.0);
    let mut y = vec![e[0]; n];
    for t in 1..n {
        y[t] = 0.8 * x[t - 1] + e[t];
    }
    (x, y)
}

/// Granger p-values (x causes y, y causes x) for the lagged pair.
pub fn granger_directional() -> (f64, f64) {
    let (x, y) = lagged_pair(77, 500);
    let m = causal_matrix(&frame(vec![("x", x), ("y", y)]), 2).unwrap();
    (m.get(0, 1), m.get(1, 0))
}

/// Independent pairs with a Granger p-value below 0.05.
pub fn granger_false_positives() -> usize {
    (0..SEEDS)
        .filter(|&s| {
            let mut rng = seeded(5000 + s);
            let a = gaussian_vec(&mut rng, 300, 1.0);
            let b = gaussian_vec(&mut rng, 300, 1.0);
            causal_matrix(&frame(vec![("a", a), ("b", b)]), 2).unwrap().get(0, 1) < 0.05
        })
        .count()
}

/// Sine of period 24 on the line 0.1 t, n = 240.
pub fn line_and_season() -> Vec<f64> {
    (0..240)
        .map(|t| (2.0 * std::f64::consts::PI * t as f64 / 24.0).sin() + 0.1 * t as f64)
        .collect()
}

/// Largest |trend + seasonal + residual - x| over the series.
pub fn decomposition_reconstruction_error() -> f64 {
    let xs = line_and_season();
    let d = decompose(&xs, 24).unwrap();
    (0..xs.len())
        .map(|t| (d.trend[t] + d.seasonal[t] + d.residual[t] - xs[t]).abs())
        .fold(0.0, f64::max)
}
