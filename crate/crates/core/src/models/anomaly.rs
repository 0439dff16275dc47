//! Reconstruction-error anomaly scores.

use serde::{Deserialize, Serialize};

use super::{resolve_order, resolve_period, ModelName, ModelSpec};
use crate::error::{OpError, OpResult};
use crate::models::regression::fit_lagged;
use crate::series::TimeSeries;
use crate::stats::decomposition::decompose;
use crate::stats::moments::sample_std;
use crate::value::FittedModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoreModel {
    /// Absolute decomposition residual over the residual standard deviation.
    #[default]
    DecompZ,
    /// Absolute one-step-ahead AR prediction error.
    ArResidual,
}

impl ScoreModel {
    pub fn parse(s: &str) -> OpResult<Self> {
        match s {
            "decomp_z" => Ok(ScoreModel::DecompZ),
            "ar_residual" => Ok(ScoreModel::ArResidual),
            other => Err(OpError::UnknownModel(other.to_string())),
        }
    }
}

const AR_MIN_LEN: usize = 20;

/// One-step-ahead predictor over a history window.
type OneStep<'a> = Box<dyn Fn(&[f64]) -> f64 + 'a>;

/// One nonnegative score per timestamp. `handle` (if given) supplies the AR
/// coefficients for `ar_residual` instead of fitting on `data`.
pub fn anomaly_score(
    data: &TimeSeries,
    model: ScoreModel,
    period: Option<usize>,
    handle: Option<&FittedModel>,
) -> OpResult<TimeSeries> {
    let xs = data.values();
    let scores = match model {
        ScoreModel::DecompZ => {
            let p = resolve_period(xs, period)?;
            let d = decompose(xs, p)?;
            let sd = sample_std(&d.residual);
            let scale = xs.iter().fold(1.0f64, |m, x| m.max(x.abs()));
            if !(sd > 1e-12 * scale) {
                vec![0.0; xs.len()]
            } else {
                d.residual.iter().map(|r| r.abs() / sd).collect()
            }
        }
        ScoreModel::ArResidual => {
            if xs.len() < AR_MIN_LEN {
                return Err(OpError::SeriesTooShort {
                    need: AR_MIN_LEN,
                    got: xs.len(),
                });
            }
            let (order, predict): (usize, OneStep<'_>) = match handle {
                Some(m) => (m.order(), Box::new(move |h: &[f64]| m.predict_next(h))),
                None => {
                    let spec = ModelSpec {
                        period,
                        ..ModelSpec::new(ModelName::ArLs)
                    };
                    let order = resolve_order(xs, &spec)?;
                    let fit = fit_lagged(xs, &[], order, 0.0)?;
                    (order, Box::new(move |h: &[f64]| fit.forecast(h, &[], 1)[0]))
                }
            };
            if order >= xs.len() {
                return Err(OpError::SeriesTooShort {
                    need: order + 1,
                    got: xs.len(),
                });
            }
            let mut s = vec![0.0; order];
            s.extend((order..xs.len()).map(|t| (xs[t] - predict(&xs[..t])).abs()));
            s
        }
    };
    data.with_values(0, scores)
}
