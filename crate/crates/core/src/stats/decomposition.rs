//! Classical additive moving-average decomposition.

use serde::{Deserialize, Serialize};

use crate::error::{OpError, OpResult};
use crate::stats::moments::mean;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompResult {
    pub trend: Vec<f64>,
    pub seasonal: Vec<f64>,
    pub residual: Vec<f64>,
}

/// Centered moving average of width `period` (2 x `period` for even
/// periods). Positions without a full window copy the nearest valid value.
pub fn centered_moving_average(xs: &[f64], period: usize) -> Vec<f64> {
    let n = xs.len();
    let half = period / 2;
    let mut trend = vec![f64::NAN; n];
    for t in half..n.saturating_sub(half) {
        trend[t] = if period % 2 == 1 {
            xs[t - half..=t + half].iter().sum::<f64>() / period as f64
        } else {
            let inner: f64 = xs[t + 1 - half..t + half].iter().sum();
            (0.5 * xs[t - half] + inner + 0.5 * xs[t + half]) / period as f64
        };
    }
    let (first, last) = (half, n - 1 - half);
    for t in 0..first {
        trend[t] = trend[first];
    }
    for t in last + 1..n {
        trend[t] = trend[last];
    }
    trend
}

pub fn decompose(xs: &[f64], period: usize) -> OpResult<DecompResult> {
    if period < 2 {
        return Err(OpError::InvalidArgument(format!(
            "period must be >= 2, got {period}"
        )));
    }
    let n = xs.len();
    if n < 2 * period {
        return Err(OpError::SeriesTooShort {
            need: 2 * period,
            got: n,
        });
    }
    let trend = centered_moving_average(xs, period);
    let half = period / 2;

    // Phase means of the detrended series over positions with a full window.
    let mut sums = vec![0.0; period];
    let mut counts = vec![0usize; period];
    for t in half..n - half {
        sums[t % period] += xs[t] - trend[t];
        counts[t % period] += 1;
    }
    let mut profile: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let centre = mean(&profile);
    profile.iter_mut().for_each(|p| *p -= centre);

    let seasonal: Vec<f64> = (0..n).map(|t| profile[t % period]).collect();
    let residual: Vec<f64> = (0..n).map(|t| xs[t] - trend[t] - seasonal[t]).collect();
    Ok(DecompResult {
        trend,
        seasonal,
        residual,
    })
}
