//! Synthetic electricity-load and 2m-temperature series.

use std::f64::consts::PI;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::rng::{gaussian_vec, Rng};
use crate::stats::moments::{mean, sample_std};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Domain {
    ElectricityLike,
    TemperatureLike,
}

fn uniform(rng: &mut Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// AR(1) path with innovation scale `sigma`, started from its stationary law.
pub fn ar1(rng: &mut Rng, n: usize, phi: f64, sigma: f64) -> Vec<f64> {
    let eps = gaussian_vec(rng, n + 1, sigma);
    let mut x = eps[0] / (1.0 - phi * phi).sqrt();
    let mut out = Vec::with_capacity(n);
    for e in &eps[1..] {
        x = phi * x + e;
        out.push(x);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ElectricityConfig {
    pub base_range: (f64, f64),
    /// Daily amplitude as a fraction of the base level.
    pub daily_amp_range: (f64, f64),
    pub weekly_amp_range: (f64, f64),
    pub noise_phi: f64,
    /// Innovation scale as a fraction of the base level.
    pub noise_frac: f64,
    /// Load response to one covariate standard deviation, as a fraction of base.
    pub covariate_effect_range: (f64, f64),
    pub covariate_lag_range: (usize, usize),
}

impl Default for ElectricityConfig {
    fn default() -> Self {
        Self {
            base_range: (800.0, 1500.0),
            daily_amp_range: (0.12, 0.22),
            weekly_amp_range: (0.03, 0.06),
            noise_phi: 0.7,
            noise_frac: 0.008,
            covariate_effect_range: (0.03, 0.06),
            covariate_lag_range: (1, 3),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Covariate {
    pub name: String,
    pub values: Vec<f64>,
    pub lag: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadSeries {
    pub load: Vec<f64>,
    pub covariates: Vec<Covariate>,
}

/// Hourly load: base level with daily and weekly cycles and AR(1) noise.
/// With covariates, a temperature and a humidity process drive the load at
/// fixed lags.
pub fn gen_electricity(rng: &mut Rng, n: usize, with_covariates: bool, cfg: &ElectricityConfig) -> LoadSeries {
    let base = uniform(rng, cfg.base_range);
    let daily = uniform(rng, cfg.daily_amp_range);
    let weekly = uniform(rng, cfg.weekly_amp_range);
    let phase = rng.random_range(0.0..24.0);
    let noise = ar1(rng, n, cfg.noise_phi, cfg.noise_frac * base);
    let mut load: Vec<f64> = (0..n)
        .map(|t| {
            let h = (t as f64 + phase) / 24.0;
            let shape = (2.0 * PI * h).sin() + 0.3 * (4.0 * PI * h).sin();
            let week = 1.0 + weekly * (2.0 * PI * t as f64 / 168.0).sin();
            base * (1.0 + daily * shape) * week + noise[t]
        })
        .collect();
    let mut covariates = Vec::new();
    if with_covariates {
        let specs = [("temperature", 20.0, 0.95, 1.0, 2.0), ("humidity", 60.0, 0.9, 2.0, 0.0)];
        for (name, level, phi, sigma, daily_c) in specs {
            let lag = rng.random_range(cfg.covariate_lag_range.0..=cfg.covariate_lag_range.1);
            let effect = uniform(rng, cfg.covariate_effect_range) * base;
            let m = n + lag;
            let proc = ar1(rng, m, phi, sigma);
            let values: Vec<f64> = (0..m)
                .map(|t| level + proc[t] + daily_c * (2.0 * PI * (t as f64 - 15.0) / 24.0).sin())
                .collect();
            let (mu, sd) = (mean(&values), sample_std(&values));
            for (t, y) in load.iter_mut().enumerate() {
                *y += effect * (values[t] - mu) / sd;
            }
            covariates.push(Covariate {
                name: name.to_string(),
                values: values[lag..].to_vec(),
                lag,
            });
        }
    }
    let floor = 0.1 * base;
    for y in &mut load {
        *y = y.max(floor);
    }
    LoadSeries { load, covariates }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TemperatureConfig {
    pub level_range: (f64, f64),
    pub daily_amp_range: (f64, f64),
    pub noise_phi: f64,
    pub noise_sigma: f64,
    /// Event size in marginal noise standard deviations.
    pub magnitude_range: (f64, f64),
    pub width_range: (usize, usize),
    /// Minimum distance between events, and between an event and either end.
    pub spacing: usize,
}

impl Default for TemperatureConfig {
    fn default() -> Self {
        Self {
            level_range: (-5.0, 25.0),
            daily_amp_range: (3.0, 8.0),
            noise_phi: 0.5,
            noise_sigma: 0.5,
            magnitude_range: (7.0, 10.0),
            width_range: (1, 2),
            spacing: 24,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub start: usize,
    pub width: usize,
    pub magnitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureSeries {
    pub values: Vec<f64>,
    /// Clean sample from the same process without events.
    pub reference: Vec<f64>,
    pub events: Vec<Event>,
    pub labels: Vec<u8>,
}

/// Hourly temperature with `n_events` injected extremes; the label vector
/// marks every hour an event covers.
pub fn gen_temperature(rng: &mut Rng, n: usize, n_events: usize, cfg: &TemperatureConfig) -> TemperatureSeries {
    let level = uniform(rng, cfg.level_range);
    let amp = uniform(rng, cfg.daily_amp_range);
    let drift = rng.random_range(-0.01..0.01);
    let phase = rng.random_range(0.0..24.0);
    let clean = |noise: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|t| level + drift * t as f64 + amp * (2.0 * PI * (t as f64 + phase) / 24.0).sin() + noise[t])
            .collect()
    };
    let mut values = clean(&ar1(rng, n, cfg.noise_phi, cfg.noise_sigma));
    let reference = clean(&ar1(rng, n, cfg.noise_phi, cfg.noise_sigma));
    let marginal = cfg.noise_sigma / (1.0 - cfg.noise_phi * cfg.noise_phi).sqrt();

    let mut events: Vec<Event> = Vec::new();
    let mut labels = vec![0u8; n];
    let mut tries = 0;
    while events.len() < n_events && tries < 1000 {
        tries += 1;
        let width = rng.random_range(cfg.width_range.0..=cfg.width_range.1);
        if n < 2 * cfg.spacing + width {
            break;
        }
        let start = rng.random_range(cfg.spacing..=n - cfg.spacing - width);
        let clash = events
            .iter()
            .any(|e| start < e.start + e.width + cfg.spacing && e.start < start + width + cfg.spacing);
        if clash {
            continue;
        }
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let magnitude = sign * uniform(rng, cfg.magnitude_range) * marginal;
        for t in start..start + width {
            values[t] += magnitude;
            labels[t] = 1;
        }
        events.push(Event {
            start,
            width,
            magnitude,
        });
    }
    events.sort_by_key(|e| e.start);
    TemperatureSeries {
        values,
        reference,
        events,
        labels,
    }
}
