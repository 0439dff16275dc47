//! Scalar and rolling features of a single series.

use serde::{Deserialize, Serialize};

use crate::error::{OpError, OpResult};
use crate::stats::moments::{detrend_linear, mean, ols_slope, sample_std, sample_variance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feature {
    TrendSlope,
    Amplitude,
    Period,
    SlidingVariance { window: usize },
    Volatility { window: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub enum FeatureValue {
    Scalar(f64),
    Series(Vec<f64>),
}

pub fn feature(xs: &[f64], kind: Feature) -> OpResult<FeatureValue> {
    let n = xs.len();
    if n < 3 {
        return Err(OpError::SeriesTooShort { need: 3, got: n });
    }
    match kind {
        Feature::TrendSlope => Ok(FeatureValue::Scalar(ols_slope(xs))),
        Feature::Amplitude => {
            let r = detrend_linear(xs);
            let max = r.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let min = r.iter().copied().fold(f64::INFINITY, f64::min);
            Ok(FeatureValue::Scalar((max - min) / 2.0))
        }
        Feature::Period => Ok(FeatureValue::Scalar(dominant_period(xs)? as f64)),
        Feature::SlidingVariance { window } => {
            check_window(window, n)?;
            Ok(FeatureValue::Series(
                xs.windows(window).map(sample_variance).collect(),
            ))
        }
        Feature::Volatility { window } => {
            if let Some(i) = xs[..n - 1].iter().position(|&x| x == 0.0) {
                return Err(OpError::DomainError(format!(
                    "relative change undefined after zero at index {i}"
                )));
            }
            let changes: Vec<f64> = xs.windows(2).map(|w| (w[1] - w[0]) / w[0]).collect();
            check_window(window, changes.len())?;
            Ok(FeatureValue::Series(
                changes.windows(window).map(sample_std).collect(),
            ))
        }
    }
}

fn check_window(window: usize, len: usize) -> OpResult<()> {
    if window < 2 {
        return Err(OpError::InvalidArgument(format!(
            "window must be >= 2, got {window}"
        )));
    }
    if window > len {
        return Err(OpError::WindowTooLarge { window, len });
    }
    Ok(())
}

/// Period with the largest periodogram power among Fourier frequencies whose
/// period lies in `[2, n/2]`.
pub fn dominant_period(xs: &[f64]) -> OpResult<usize> {
    let n = xs.len();
    if n < 4 {
        return Err(OpError::SeriesTooShort { need: 4, got: n });
    }
    let r = detrend_linear(xs);
    let m = mean(&r);
    let centred: Vec<f64> = r.iter().map(|x| x - m).collect();
    // Power at each integer period rather than at the Fourier bins, whose
    // spacing n/k cannot land on most periods of a short series.
    let mut best = (0usize, 0.0f64);
    for p in 2..=n / 2 {
        let w = 2.0 * std::f64::consts::PI / p as f64;
        let (mut re, mut im) = (0.0, 0.0);
        for (t, x) in centred.iter().enumerate() {
            let (s, c) = (w * t as f64).sin_cos();
            re += x * c;
            im += x * s;
        }
        let power = re * re + im * im;
        if power > best.1 {
            best = (p, power);
        }
    }
    if best.0 == 0 {
        return Err(OpError::ConstantSeries("periodogram"));
    }
    // Leakage from the detrending residual can move the peak one period off;
    // settle between neighbours by how much of the variance a folded
    // seasonal profile explains.
    let p0 = best.0;
    let mut pick = (p0, folded_fit(&centred, p0));
    for p in (p0 - 1).max(2)..=(p0 + 1).min(n / 2) {
        let fit = folded_fit(&centred, p);
        if fit > pick.1 + 1e-9 {
            pick = (p, fit);
        }
    }
    Ok(pick.0)
}

/// Share of variance explained by the per-phase means at period `p`.
fn folded_fit(xs: &[f64], p: usize) -> f64 {
    let mut sums = vec![0.0; p];
    let mut counts = vec![0usize; p];
    for (t, x) in xs.iter().enumerate() {
        sums[t % p] += x;
        counts[t % p] += 1;
    }
    let total: f64 = xs.iter().map(|x| x * x).sum();
    if total == 0.0 {
        return 0.0;
    }
    let explained: f64 = sums.iter().zip(&counts).map(|(s, &c)| s * s / c as f64).sum();
    explained / total
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn scalar(v: FeatureValue) -> f64 {
        match v {
            FeatureValue::Scalar(x) => x,
            FeatureValue::Series(_) => panic!("expected scalar"),
        }
    }

    #[test]
    fn trend_slope_exact() {
        let xs: Vec<f64> = (0..10).map(|t| 2.0 * t as f64).collect();
        assert!((scalar(feature(&xs, Feature::TrendSlope).unwrap()) - 2.0).abs() < 1e-12);
    }

    /// Independent oracle: scan candidate integer periods by the power of a
    /// least-squares sinusoid fit at that period.
    fn oracle_period(xs: &[f64], candidates: std::ops::RangeInclusive<usize>) -> usize {
        let mut best = (0, 0.0);
        for p in candidates {
            let w = 2.0 * PI / p as f64;
            let c: f64 = xs
                .iter()
                .enumerate()
                .map(|(t, x)| x * (w * t as f64).cos())
                .sum();
            let s: f64 = xs
                .iter()
                .enumerate()
                .map(|(t, x)| x * (w * t as f64).sin())
                .sum();
            if c * c + s * s > best.1 {
                best = (p, c * c + s * s);
            }
        }
        best.0
    }

    #[test]
    fn period_of_sine() {
        let xs: Vec<f64> = (0..480)
            .map(|t| (2.0 * PI * t as f64 / 24.0).sin())
            .collect();
        assert_eq!(oracle_period(&xs, 2..=240), 24);
        assert_eq!(scalar(feature(&xs, Feature::Period).unwrap()), 24.0);
    }

    #[test]
    fn amplitude_of_sine_on_line() {
        let xs: Vec<f64> = (0..480)
            .map(|t| 3.0 * (2.0 * PI * t as f64 / 24.0).sin() + 0.01 * t as f64)
            .collect();
        let a = scalar(feature(&xs, Feature::Amplitude).unwrap());
        // The OLS detrend absorbs a small part of the sine into the slope.
        assert!((a - 3.0).abs() < 0.2, "{a}");
    }

    #[test]
    fn sliding_variance_constant() {
        match feature(&[4.0; 12], Feature::SlidingVariance { window: 5 }).unwrap() {
            FeatureValue::Series(v) => {
                assert_eq!(v.len(), 8);
                assert!(v.iter().all(|x| *x == 0.0));
            }
            _ => panic!(),
        }
    }

    #[test]
    fn volatility_shape_and_errors() {
        let xs = [1.0, 2.0, 1.0, 2.0, 1.0, 2.0];
        match feature(&xs, Feature::Volatility { window: 3 }).unwrap() {
            FeatureValue::Series(v) => assert_eq!(v.len(), 3),
            _ => panic!(),
        }
        assert!(matches!(
            feature(&xs, Feature::SlidingVariance { window: 7 }),
            Err(OpError::WindowTooLarge { .. })
        ));
        assert!(matches!(
            feature(&[1.0, 2.0], Feature::TrendSlope),
            Err(OpError::SeriesTooShort { .. })
        ));
    }
}
