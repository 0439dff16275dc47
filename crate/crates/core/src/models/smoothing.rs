//! Naive, drift, exponential-smoothing and theta forecasters.

use crate::stats::moments::{mean, ols_slope};

pub const HW_ALPHA: f64 = 0.2;
pub const HW_BETA: f64 = 0.05;
pub const HW_GAMMA: f64 = 0.1;
pub const SES_ALPHA: f64 = 0.5;

pub fn seasonal_naive(xs: &[f64], period: usize, horizon: usize) -> Vec<f64> {
    let n = xs.len();
    let period = period.min(n);
    (0..horizon).map(|h| xs[n - period + h % period]).collect()
}

pub fn drift(xs: &[f64], horizon: usize) -> Vec<f64> {
    let n = xs.len();
    let slope = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    (1..=horizon)
        .map(|h| xs[n - 1] + slope * h as f64)
        .collect()
}

/// Additive Holt-Winters.
///
/// Initial level is the first-period mean, initial trend the average
/// period-over-period difference across the first two periods, initial
/// seasonal terms the first-period deviations from that level.
pub fn holt_winters(
    xs: &[f64],
    period: usize,
    alpha: f64,
    beta: f64,
    gamma: f64,
    horizon: usize,
) -> Vec<f64> {
    let p = period;
    let mut level = mean(&xs[..p]);
    let mut trend = (0..p).map(|i| xs[p + i] - xs[i]).sum::<f64>() / (p * p) as f64;
    let mut season: Vec<f64> = xs[..p].iter().map(|x| x - level).collect();
    for (t, &y) in xs.iter().enumerate().skip(p) {
        let s = season[t % p];
        let prev = level;
        level = alpha * (y - s) + (1.0 - alpha) * (level + trend);
        trend = beta * (level - prev) + (1.0 - beta) * trend;
        season[t % p] = gamma * (y - level) + (1.0 - gamma) * s;
    }
    let n = xs.len();
    (1..=horizon)
        .map(|h| level + h as f64 * trend + season[(n + h - 1) % p])
        .collect()
}

/// Simple exponential smoothing level after the last observation.
fn ses_level(xs: &[f64], alpha: f64) -> f64 {
    xs[1..]
        .iter()
        .fold(xs[0], |level, &y| alpha * y + (1.0 - alpha) * level)
}

/// Theta method: equal-weight combination of the extrapolated OLS line
/// (theta = 0) and simple exponential smoothing of the theta = 2 line.
pub fn theta(xs: &[f64], alpha: f64, horizon: usize) -> Vec<f64> {
    let n = xs.len();
    let b = ols_slope(xs);
    let a = mean(xs) - b * (n as f64 - 1.0) / 2.0;
    let line = |t: f64| a + b * t;
    let theta2: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(t, y)| 2.0 * y - line(t as f64))
        .collect();
    let ses = ses_level(&theta2, alpha);
    (0..horizon)
        .map(|h| 0.5 * line((n + h) as f64) + 0.5 * ses)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::mape;
    use std::f64::consts::PI;

    #[test]
    fn holt_winters_on_clean_sine() {
        let y = |t: usize| 10.0 * (2.0 * PI * t as f64 / 24.0).sin() + 50.0;
        let xs: Vec<f64> = (0..480).map(y).collect();
        let truth: Vec<f64> = (480..504).map(y).collect();
        let f = holt_winters(&xs, 24, HW_ALPHA, HW_BETA, HW_GAMMA, 24);
        assert!(mape(&truth, &f).unwrap() < 0.05);
    }

    #[test]
    fn holt_winters_tracks_trend() {
        let xs: Vec<f64> = (0..120)
            .map(|t| 2.0 * t as f64 + [0.0, 3.0, -3.0, 0.0][t % 4])
            .collect();
        let f = holt_winters(&xs, 4, HW_ALPHA, HW_BETA, HW_GAMMA, 4);
        let truth: Vec<f64> = (120..124)
            .map(|t| 2.0 * t as f64 + [0.0, 3.0, -3.0, 0.0][t % 4])
            .collect();
        assert!(mape(&truth, &f).unwrap() < 0.01);
    }

    #[test]
    fn theta_on_line_is_exact() {
        let xs: Vec<f64> = (0..30).map(|t| 5.0 + 0.5 * t as f64).collect();
        // On an exact line the theta = 2 line equals the data, so SES lags by
        // a known amount; the combination still lies between line and SES.
        let f = theta(&xs, 1.0, 3);
        for (h, v) in f.iter().enumerate() {
            let line = 5.0 + 0.5 * (30 + h) as f64;
            assert!((v - (0.5 * line + 0.5 * xs[29])).abs() < 1e-9);
        }
    }

    #[test]
    fn seasonal_naive_translation_equivariant() {
        let xs: Vec<f64> = (0..20).map(|t| ((t * 7) % 5) as f64).collect();
        let shifted: Vec<f64> = xs.iter().map(|x| x + 3.5).collect();
        let a = seasonal_naive(&xs, 5, 7);
        let b = seasonal_naive(&shifted, 5, 7);
        for (x, y) in a.iter().zip(&b) {
            assert!((y - x - 3.5).abs() < 1e-12);
        }
    }
}
