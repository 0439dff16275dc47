//! Autoregressive and lagged-covariate least-squares models.

use crate::error::{OpError, OpResult};
use crate::linalg::{lstsq, lstsq_full_rank};
use crate::value::FittedModel;

/// `y_t = intercept + Σ_k a_k y_{t-k} + Σ_j Σ_k c_{jk} x_{j,t-k}`, `k = 1..=order`.
#[derive(Debug, Clone, PartialEq)]
pub struct LaggedFit {
    pub order: usize,
    pub intercept: f64,
    pub target_coef: Vec<f64>,
    pub cov_coef: Vec<Vec<f64>>,
    pub rss: f64,
}

fn design_row(y: &[f64], covs: &[&[f64]], t: usize, order: usize) -> Vec<f64> {
    let mut row = Vec::with_capacity(1 + order * (1 + covs.len()));
    row.push(1.0);
    row.extend((1..=order).map(|k| y[t - k]));
    for c in covs {
        row.extend((1..=order).map(|k| c[t - k]));
    }
    row
}

/// Ridge (or plain, when `ridge == 0`) least squares on lagged values.
/// The intercept is never penalized. Rank-deficient designs get the
/// minimum-norm solution.
pub fn fit_lagged(y: &[f64], covs: &[&[f64]], order: usize, ridge: f64) -> OpResult<LaggedFit> {
    let n = y.len();
    if order == 0 {
        return Err(OpError::InvalidArgument("order must be >= 1".into()));
    }
    if n <= order + 1 {
        return Err(OpError::HistoryTooShort {
            need: order + 2,
            got: n,
        });
    }
    for c in covs {
        if c.len() != n {
            return Err(OpError::LengthMismatch {
                left: n,
                right: c.len(),
            });
        }
    }
    let mut rows: Vec<Vec<f64>> = (order..n).map(|t| design_row(y, covs, t, order)).collect();
    let mut target: Vec<f64> = y[order..].to_vec();
    let k = rows[0].len();
    if ridge > 0.0 {
        let s = ridge.sqrt();
        for j in 1..k {
            let mut r = vec![0.0; k];
            r[j] = s;
            rows.push(r);
            target.push(0.0);
        }
    }
    let fit = lstsq(&rows, &target)?;
    let coef = fit.coef;
    let cov_coef = (0..covs.len())
        .map(|j| coef[1 + order * (j + 1)..1 + order * (j + 2)].to_vec())
        .collect();
    Ok(LaggedFit {
        order,
        intercept: coef[0],
        target_coef: coef[1..=order].to_vec(),
        cov_coef,
        rss: fit.rss,
    })
}

impl LaggedFit {
    /// Iterated multi-step forecast. Each covariate slice must cover the
    /// history plus at least `horizon - 1` future points.
    pub fn forecast(&self, history: &[f64], covs: &[&[f64]], horizon: usize) -> Vec<f64> {
        let mut y = history.to_vec();
        for _ in 0..horizon {
            let t = y.len();
            let row = design_row(&y, covs, t, self.order);
            let mut v = self.intercept;
            for (k, a) in self.target_coef.iter().enumerate() {
                v += a * row[1 + k];
            }
            for (j, cs) in self.cov_coef.iter().enumerate() {
                for (k, c) in cs.iter().enumerate() {
                    v += c * row[1 + self.order * (j + 1) + k];
                }
            }
            y.push(v);
        }
        y.split_off(history.len())
    }
}

/// Full-rank AR(order) fit with intercept.
pub fn fit_ar(data: &[f64], order: usize) -> OpResult<FittedModel> {
    let n = data.len();
    if order == 0 {
        return Err(OpError::InvalidArgument("order must be >= 1".into()));
    }
    if n < 3 * order + 5 {
        return Err(OpError::HistoryTooShort {
            need: 3 * order + 5,
            got: n,
        });
    }
    let rows: Vec<Vec<f64>> = (order..n)
        .map(|t| design_row(data, &[], t, order))
        .collect();
    let fit = lstsq_full_rank(&rows, &data[order..], "AR fit")?;
    Ok(FittedModel {
        id: format!("ar_ls(order={order},n={n})"),
        intercept: fit.coef[0],
        coefficients: fit.coef[1..].to_vec(),
    })
}
