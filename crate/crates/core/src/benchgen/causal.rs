//! Lagged structural data over a directed relation matrix.

use std::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{OpError, OpResult};
use crate::rng::{gaussian_vec, Rng};
use crate::series::{Frame, Matrix, TimeSeries};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenConfig {
    pub length: usize,
    pub trend_slope_range: (f64, f64),
    pub season_period_range: (usize, usize),
    pub season_amp_range: (f64, f64),
    pub noise_sigma_range: (f64, f64),
    pub lag_range: (usize, usize),
    pub coef_range: (f64, f64),
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            length: 500,
            trend_slope_range: (-0.004, 0.004),
            season_period_range: (12, 48),
            season_amp_range: (0.3, 1.0),
            noise_sigma_range: (0.2, 0.3),
            lag_range: (1, 5),
            coef_range: (0.5, 0.9),
        }
    }
}

impl GenConfig {
    pub fn validate(&self) -> OpResult<()> {
        let ok = self.length >= 50
            && self.trend_slope_range.0 <= self.trend_slope_range.1
            && 2 <= self.season_period_range.0
            && self.season_period_range.0 <= self.season_period_range.1
            && 0.0 <= self.season_amp_range.0
            && self.season_amp_range.0 <= self.season_amp_range.1
            && 0.0 < self.noise_sigma_range.0
            && self.noise_sigma_range.0 <= self.noise_sigma_range.1
            && 1 <= self.lag_range.0
            && self.lag_range.0 <= self.lag_range.1
            && self.coef_range.0 <= self.coef_range.1;
        if ok {
            Ok(())
        } else {
            Err(OpError::InvalidArgument("invalid causal generator ranges".into()))
        }
    }
}

fn uniform(rng: &mut Rng, (lo, hi): (f64, f64)) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// The four-variable example: A drives B and D, B drives D, C drives B and D.
pub fn example_relation() -> Matrix {
    Matrix::from_rows(&[
        vec![1.0, 1.0, 0.0, 1.0],
        vec![0.0, 1.0, 0.0, 1.0],
        vec![0.0, 1.0, 1.0, 1.0],
        vec![0.0, 0.0, 0.0, 1.0],
    ])
    .expect("static matrix")
}

/// Variables in an order where every edge points forward.
pub fn topological_order(relation: &Matrix) -> OpResult<Vec<usize>> {
    let d = relation.rows();
    if !relation.is_square() {
        return Err(OpError::ShapeMismatch("relation matrix must be square".into()));
    }
    let mut indeg: Vec<usize> = (0..d)
        .map(|j| (0..d).filter(|&i| i != j && relation.get(i, j) != 0.0).count())
        .collect();
    let mut ready: Vec<usize> = (0..d).filter(|&j| indeg[j] == 0).collect();
    let mut order = Vec::with_capacity(d);
    while let Some(i) = ready.first().copied() {
        ready.remove(0);
        order.push(i);
        for (j, deg) in indeg.iter_mut().enumerate() {
            if j != i && relation.get(i, j) != 0.0 {
                *deg -= 1;
                if *deg == 0 {
                    ready.push(j);
                }
            }
        }
    }
    if order.len() < d {
        return Err(OpError::CyclicRelation);
    }
    Ok(order)
}

/// Random DAG on `d` variables with `round(ratio * d(d-1))` edges, capped at
/// the `d(d-1)/2` a DAG can hold. Diagonal entries are 1.
pub fn sample_relation(rng: &mut Rng, d: usize, ratio: f64) -> Matrix {
    let pairs = d * (d - 1);
    let k = ((ratio * pairs as f64).round() as usize).min(pairs / 2);
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for a in 0..d {
        for b in a + 1..d {
            candidates.push((order[a], order[b]));
        }
    }
    candidates.shuffle(rng);
    let mut m = Matrix::zeros(d, d);
    for i in 0..d {
        m.set(i, i, 1.0);
    }
    for &(i, j) in candidates.iter().take(k) {
        m.set(i, j, 1.0);
    }
    m
}

pub fn variable_names(d: usize) -> Vec<String> {
    (0..d).map(|i| ((b'A' + i as u8) as char).to_string()).collect()
}

/// `x_j[t] = slope_j * t + season_j(t) + sum_i c_ij * x_i[t - lag_ij] + noise`
/// over the parents `i` of `j`, generated in topological order. The first
/// `max lag` steps are a warm-up and are dropped.
pub fn gen_causal_dataset(rng: &mut Rng, relation: &Matrix, cfg: &GenConfig) -> OpResult<(Frame, Matrix)> {
    cfg.validate()?;
    let order = topological_order(relation)?;
    let d = relation.rows();
    let warm = cfg.lag_range.1;
    let n = cfg.length + warm;
    let mut data = vec![vec![0.0; n]; d];
    for &j in &order {
        let slope = uniform(rng, cfg.trend_slope_range);
        let period = rng.random_range(cfg.season_period_range.0..=cfg.season_period_range.1) as f64;
        let amp = uniform(rng, cfg.season_amp_range);
        let phase = rng.random_range(0.0..1.0);
        let sigma = uniform(rng, cfg.noise_sigma_range);
        let parents: Vec<(usize, usize, f64)> = (0..d)
            .filter(|&i| i != j && relation.get(i, j) != 0.0)
            .map(|i| {
                let lag = rng.random_range(cfg.lag_range.0..=cfg.lag_range.1);
                let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
                (i, lag, sign * uniform(rng, cfg.coef_range))
            })
            .collect();
        let noise = gaussian_vec(rng, n, sigma);
        for t in 0..n {
            let mut v = slope * t as f64 + amp * (2.0 * PI * (t as f64 / period + phase)).sin() + noise[t];
            for &(i, lag, c) in &parents {
                if t >= lag {
                    v += c * data[i][t - lag];
                }
            }
            data[j][t] = v;
        }
    }
    let names = variable_names(d);
    let cols = data
        .into_iter()
        .zip(names)
        .map(|(v, name)| TimeSeries::from_values(name, v[warm..].to_vec()))
        .collect::<OpResult<Vec<_>>>()?;
    let mut truth = relation.clone();
    for i in 0..d {
        truth.set(i, i, 1.0);
    }
    Ok((Frame::new(cols)?, truth))
}
