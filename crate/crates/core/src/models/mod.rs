//! Forecasting and anomaly-scoring backends behind uniform signatures.

mod anomaly;
mod regression;
mod smoothing;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{OpError, OpResult};
use crate::metrics::{mape_guarded, Quality};
use crate::series::{Frame, TimeSeries};
use crate::stats::features::dominant_period;
use crate::stats::moments::is_constant;

pub use anomaly::{anomaly_score, ScoreModel};
pub use regression::{fit_ar, fit_lagged, LaggedFit};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    SeasonalNaive,
    Drift,
    HoltWinters,
    ArLs,
    Theta,
    LaggedRegression,
}

impl ModelName {
    pub const ALL: [ModelName; 6] = [
        ModelName::SeasonalNaive,
        ModelName::Drift,
        ModelName::HoltWinters,
        ModelName::ArLs,
        ModelName::Theta,
        ModelName::LaggedRegression,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ModelName::SeasonalNaive => "seasonal_naive",
            ModelName::Drift => "drift",
            ModelName::HoltWinters => "holt_winters",
            ModelName::ArLs => "ar_ls",
            ModelName::Theta => "theta",
            ModelName::LaggedRegression => "lagged_regression",
        }
    }

    pub fn parse(s: &str) -> OpResult<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| OpError::UnknownModel(s.to_string()))
    }

    fn uses_period(&self) -> bool {
        matches!(self, ModelName::SeasonalNaive | ModelName::HoltWinters)
    }

    fn uses_order(&self) -> bool {
        matches!(self, ModelName::ArLs | ModelName::LaggedRegression)
    }
}

impl fmt::Display for ModelName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Backend choice plus optional parameters. Unset parameters are resolved
/// from the data at fit time and recorded in [`Forecast::model_used`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub name: ModelName,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ar_order: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ridge: Option<f64>,
}

impl ModelSpec {
    pub fn new(name: ModelName) -> Self {
        Self {
            name,
            period: None,
            ar_order: None,
            alpha: None,
            beta: None,
            gamma: None,
            ridge: None,
        }
    }

    pub fn with_period(mut self, period: usize) -> Self {
        self.period = Some(period);
        self
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.ar_order = Some(order);
        self
    }

    fn validate(&self) -> OpResult<()> {
        if matches!(self.period, Some(p) if p < 2) {
            return Err(OpError::InvalidArgument("period must be >= 2".into()));
        }
        if self.ar_order == Some(0) {
            return Err(OpError::InvalidArgument("ar_order must be >= 1".into()));
        }
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if matches!(v, Some(x) if !(0.0..=1.0).contains(&x)) {
                return Err(OpError::InvalidArgument(format!(
                    "{name} must lie in [0, 1]"
                )));
            }
        }
        if matches!(self.ridge, Some(l) if !(l >= 0.0 && l.is_finite())) {
            return Err(OpError::InvalidArgument(
                "ridge must be finite and >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub values: TimeSeries,
    pub model_used: ModelSpec,
}

/// Period given explicitly, else estimated from the periodogram; estimates
/// are capped at `n / 2`. Data without any periodic component (constant or
/// exactly linear) defaults to 2.
pub fn resolve_period(xs: &[f64], given: Option<usize>) -> OpResult<usize> {
    match given {
        Some(p) => Ok(p),
        None if is_constant(xs) => Ok(2),
        None => Ok(dominant_period(xs).unwrap_or(2).min(xs.len() / 2).max(2)),
    }
}

/// Order given explicitly, else the seasonal period capped so the
/// regression keeps at least three rows per coefficient.
fn resolve_order(xs: &[f64], spec: &ModelSpec) -> OpResult<usize> {
    if let Some(p) = spec.ar_order {
        return Ok(p);
    }
    let cap = ((xs.len().saturating_sub(5)) / 3).max(1);
    Ok(resolve_period(xs, spec.period)?.min(cap))
}

fn check_history(n: usize, spec: &ModelSpec, period: usize, order: usize) -> OpResult<()> {
    let mut need = 8;
    if spec.name.uses_period() {
        need = need.max(2 * period);
    }
    if spec.name.uses_order() {
        need = need.max(3 * order);
    }
    if n < need {
        return Err(OpError::HistoryTooShort { need, got: n });
    }
    Ok(())
}

/// Resolve defaulted parameters against the history.
fn resolve(xs: &[f64], spec: &ModelSpec) -> OpResult<ModelSpec> {
    spec.validate()?;
    let mut out = spec.clone();
    let period = resolve_period(xs, spec.period)?;
    if spec.name.uses_period() {
        out.period = Some(period);
    }
    let order = if spec.name.uses_order() {
        let p = resolve_order(xs, spec)?;
        out.ar_order = Some(p);
        p
    } else {
        0
    };
    check_history(xs.len(), spec, period, order)?;
    match spec.name {
        ModelName::HoltWinters => {
            out.alpha.get_or_insert(smoothing::HW_ALPHA);
            out.beta.get_or_insert(smoothing::HW_BETA);
            out.gamma.get_or_insert(smoothing::HW_GAMMA);
        }
        ModelName::Theta => {
            out.alpha.get_or_insert(smoothing::SES_ALPHA);
        }
        ModelName::ArLs | ModelName::LaggedRegression => {
            out.ridge.get_or_insert(0.0);
        }
        _ => {}
    }
    Ok(out)
}

fn finish(data: &TimeSeries, values: Vec<f64>, model_used: ModelSpec) -> OpResult<Forecast> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(OpError::DomainError(format!(
            "{} produced a non-finite forecast",
            model_used.name
        )));
    }
    Ok(Forecast {
        values: TimeSeries::new(
            data.name.clone(),
            data.next_timestamp(),
            data.step_secs,
            values,
        )?,
        model_used,
    })
}

pub fn forecast_uni(data: &TimeSeries, horizon: usize, spec: &ModelSpec) -> OpResult<Forecast> {
    if horizon == 0 {
        return Err(OpError::InvalidArgument("horizon must be >= 1".into()));
    }
    let xs = data.values();
    let used = resolve(xs, spec)?;
    let values = match used.name {
        ModelName::SeasonalNaive => smoothing::seasonal_naive(xs, used.period.unwrap(), horizon),
        ModelName::Drift => smoothing::drift(xs, horizon),
        ModelName::HoltWinters => smoothing::holt_winters(
            xs,
            used.period.unwrap(),
            used.alpha.unwrap(),
            used.beta.unwrap(),
            used.gamma.unwrap(),
            horizon,
        ),
        ModelName::Theta => smoothing::theta(xs, used.alpha.unwrap(), horizon),
        ModelName::ArLs | ModelName::LaggedRegression => {
            let fit = fit_lagged(xs, &[], used.ar_order.unwrap(), used.ridge.unwrap())?;
            fit.forecast(xs, &[], horizon)
        }
    };
    finish(data, values, used)
}

/// Single-target forecast driven by lagged covariates. Backends other than
/// `lagged_regression` ignore the covariates.
pub fn forecast_multi(
    target: &TimeSeries,
    covariates: &Frame,
    horizon: usize,
    spec: &ModelSpec,
) -> OpResult<Forecast> {
    if covariates.width() > 0 && covariates.len() != target.len() {
        return Err(OpError::LengthMismatch {
            left: target.len(),
            right: covariates.len(),
        });
    }
    if spec.name != ModelName::LaggedRegression || covariates.width() == 0 {
        return forecast_uni(target, horizon, spec);
    }
    if horizon == 0 {
        return Err(OpError::InvalidArgument("horizon must be >= 1".into()));
    }
    let xs = target.values();
    let mut used = resolve(xs, spec)?;
    let order = used.ar_order.unwrap();
    let covs: Vec<&[f64]> = covariates
        .columns()
        .iter()
        .map(TimeSeries::values)
        .collect();
    let fit = fit_lagged(xs, &covs, order, used.ridge.unwrap())?;
    // Unknown future covariates continue by repeating their last period.
    let period = resolve_period(xs, spec.period)?;
    used.period = Some(period);
    let extended: Vec<Vec<f64>> = covs
        .iter()
        .map(|c| {
            let mut v = c.to_vec();
            v.extend(smoothing::seasonal_naive(c, period, horizon));
            v
        })
        .collect();
    let ext_refs: Vec<&[f64]> = extended.iter().map(Vec::as_slice).collect();
    let values = fit.forecast(xs, &ext_refs, horizon);
    finish(target, values, used)
}

/// Forecast and score on a trailing holdout of `horizon` points.
#[derive(Debug, Clone, PartialEq)]
pub struct Backtest {
    pub quality: Quality,
    pub forecast: Forecast,
}

pub fn backtest_detail(
    data: &TimeSeries,
    covariates: Option<&Frame>,
    horizon: usize,
    spec: &ModelSpec,
) -> OpResult<Backtest> {
    let n = data.len();
    if horizon == 0 {
        return Err(OpError::InvalidArgument("horizon must be >= 1".into()));
    }
    if n < 2 * horizon {
        return Err(OpError::HistoryTooShort {
            need: 2 * horizon,
            got: n,
        });
    }
    let cut = n - horizon;
    let train = data.slice(0, cut)?;
    let forecast = match covariates {
        Some(c) if c.width() > 0 => forecast_multi(&train, &c.slice(0, cut)?, horizon, spec)?,
        _ => forecast_uni(&train, horizon, spec)?,
    };
    let value = mape_guarded(&data.values()[cut..], forecast.values.values())?;
    Ok(Backtest {
        quality: Quality::mape(value),
        forecast,
    })
}

pub fn backtest(
    data: &TimeSeries,
    covariates: Option<&Frame>,
    horizon: usize,
    spec: &ModelSpec,
) -> OpResult<Quality> {
    Ok(backtest_detail(data, covariates, horizon, spec)?.quality)
}
