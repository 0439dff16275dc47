//! Shared inputs for the operator benchmarks.

use std::f64::consts::PI;

use tsr_core::benchgen::{generate, BenchConfig};
use tsr_core::rng::{gaussian_vec, seeded};
use tsr_core::{Frame, TaskInstance, TimeSeries};

/// Hourly load with a daily cycle, trend and noise.
pub fn load_series(n: usize) -> TimeSeries {
    let noise = gaussian_vec(&mut seeded(1), n, 20.0);
    let y = (0..n)
        .map(|t| 1200.0 + 0.1 * t as f64 + 180.0 * (2.0 * PI * t as f64 / 24.0).sin() + noise[t])
        .collect();
    TimeSeries::from_values("load", y).expect("finite values")
}

/// `d` columns where column `k` follows column `k - 1` at lag one.
pub fn chain_frame(d: usize, n: usize) -> Frame {
    let mut rng = seeded(2);
    let mut cols: Vec<Vec<f64>> = vec![gaussian_vec(&mut rng, n, 1.0)];
    for _ in 1..d {
        let e = gaussian_vec(&mut rng, n, 1.0);
        let prev = cols.last().unwrap();
        let next = (0..n).map(|t| if t > 0 { 0.7 * prev[t - 1] } else { 0.0 } + e[t]).collect();
        cols.push(next);
    }
    let series = cols
        .into_iter()
        .enumerate()
        .map(|(k, v)| TimeSeries::from_values(format!("x{k}"), v).expect("finite values"))
        .collect();
    Frame::new(series).expect("aligned columns")
}

/// One generated task of each family group.
pub fn sample_tasks() -> Vec<TaskInstance> {
    let tasks = generate(&BenchConfig {
        master_seed: 3,
        predictive_per_kind: 1,
        anomaly_per_variant: 1,
        causal_count: 1,
        families: vec!["predictive:ramp_rate".into(), "predictive-cov:max_load".into(), "anomaly".into(), "causal".into()],
        ..BenchConfig::default()
    });
    tasks.expect("generation succeeds")
}

pub const PLAN_TEXT: &str = "```python
FORECAST = forecast_multi(data=VAL, covariates=COV, future_length=24, model=\"lagged_regression\")
FINAL_RESULT = project(data=FORECAST, kind=\"ramp_rate\", value=45.5, anchor=VAL)
NORM_SCORE = AnomalDetOP(data=NORM_VAL)
THRES = calibrateThreshOP(data=NORM_SCORE)
```
";
