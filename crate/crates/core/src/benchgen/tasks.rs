//! Task instances built from the synthetic generators.

use std::collections::BTreeMap;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::causal::{gen_causal_dataset, sample_relation, variable_names, GenConfig};
use super::series::{gen_electricity, gen_temperature, ElectricityConfig, TemperatureConfig};
use super::templates::{anomaly_question, causal_question, predictive_question};
use super::GenError;
use crate::constraint::{check, project, ConstraintKind, ConstraintSpec};
use crate::metrics::mape;
use crate::rng::{seeded, Rng};
use crate::series::{default_start, Frame, TimeSeries};
use crate::stats::moments::{is_constant, sample_std};
use crate::task::{Knowledge, OutputContract, TaskInstance, TaskKind, DEFAULT_QUALITY_THRESHOLD};
use crate::value::{Value, ValueKind};

const STEP_SECS: i64 = 3600;
const UNIT: &str = "hours";
pub const MAX_ATTEMPTS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictiveVariant {
    Plain,
    Covariates,
    /// One zone of a multi-zone grid.
    Grid,
}

impl PredictiveVariant {
    pub const ALL: [PredictiveVariant; 3] = [
        PredictiveVariant::Plain,
        PredictiveVariant::Covariates,
        PredictiveVariant::Grid,
    ];

    pub fn family_prefix(self) -> &'static str {
        match self {
            PredictiveVariant::Plain => "predictive",
            PredictiveVariant::Covariates => "predictive-cov",
            PredictiveVariant::Grid => "predictive-grid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnomalyVariant {
    Reference,
    Rate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PredictiveConfig {
    pub history_range: (usize, usize),
    pub horizon_range: (usize, usize),
    pub grid_zones: usize,
    pub electricity: ElectricityConfig,
}

impl Default for PredictiveConfig {
    fn default() -> Self {
        Self {
            history_range: (336, 504),
            horizon_range: (24, 48),
            grid_zones: 3,
            electricity: ElectricityConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnomalyConfig {
    pub length_range: (usize, usize),
    pub events_range: (usize, usize),
    pub temperature: TemperatureConfig,
}

impl Default for AnomalyConfig {
    fn default() -> Self {
        Self {
            length_range: (168, 336),
            events_range: (2, 5),
            temperature: TemperatureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CausalConfig {
    pub variables_range: (usize, usize),
    pub ratio_range: (f64, f64),
    pub data: GenConfig,
}

impl Default for CausalConfig {
    fn default() -> Self {
        Self {
            variables_range: (3, 6),
            ratio_range: (0.15, 0.45),
            data: GenConfig::default(),
        }
    }
}

fn series(name: &str, offset: usize, values: Vec<f64>) -> Result<TimeSeries, GenError> {
    let start = default_start() + chrono::Duration::seconds(offset as i64 * STEP_SECS);
    Ok(TimeSeries::new(name, start, STEP_SECS, values)?)
}

fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut s = xs.to_vec();
    s.sort_by(f64::total_cmp);
    let pos = q * (s.len() - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    s[lo] + (s[hi] - s[lo]) * (pos - lo as f64)
}

/// A limit that the true future breaks, so an unadjusted perfect forecast
/// would fail, while its projection stays close to the truth.
pub fn sample_binding_constraint(
    rng: &mut Rng,
    kind: ConstraintKind,
    truth: &[f64],
    anchor: f64,
) -> ConstraintSpec {
    let value = match kind {
        ConstraintKind::MaxLoad => quantile(truth, rng.random_range(0.75..0.95)),
        ConstraintKind::MinLoad => quantile(truth, rng.random_range(0.05..0.25)),
        ConstraintKind::RampRate => {
            let mut prev = anchor;
            let mut worst = 0.0f64;
            for &y in truth {
                worst = worst.max((y - prev).abs());
                prev = y;
            }
            worst * rng.random_range(0.6..0.9)
        }
        ConstraintKind::Variability => sample_std(truth) * rng.random_range(0.7..0.9),
    };
    let spec = ConstraintSpec::new(kind, round4(value));
    if kind == ConstraintKind::RampRate {
        spec.with_anchor(anchor)
    } else {
        spec
    }
}

/// Binding, and the projected truth is a sensible non-constant answer.
fn acceptable(truth: &[f64], spec: &ConstraintSpec) -> bool {
    let Ok(violations) = check(truth, spec) else {
        return false;
    };
    let Ok(projected) = project(truth, spec) else {
        return false;
    };
    !violations.is_empty()
        && spec.value > 0.0
        && check(&projected, spec).is_ok_and(|v| v.is_empty())
        && !is_constant(&projected)
        && mape(truth, &projected).is_ok_and(|m| m < 1.0)
}

pub struct PredictiveRequest<'a> {
    pub id: String,
    pub family: String,
    pub seed: u64,
    pub kind: ConstraintKind,
    pub variant: PredictiveVariant,
    /// Grid column to use; ignored by the other variants.
    pub zone: usize,
    pub cfg: &'a PredictiveConfig,
}

pub fn make_predictive_task(req: &PredictiveRequest) -> Result<TaskInstance, GenError> {
    let mut rng = seeded(req.seed);
    let cfg = req.cfg;
    for _ in 0..MAX_ATTEMPTS {
        let n_hist = rng.random_range(cfg.history_range.0..=cfg.history_range.1);
        let horizon = rng.random_range(cfg.horizon_range.0..=cfg.horizon_range.1);
        let n = n_hist + horizon;
        let (target, load, covariates) = match req.variant {
            PredictiveVariant::Plain => ("load".to_string(), gen_electricity(&mut rng, n, false, &cfg.electricity).load, None),
            PredictiveVariant::Covariates => {
                let s = gen_electricity(&mut rng, n, true, &cfg.electricity);
                (String::from("load"), s.load, Some(s.covariates))
            }
            PredictiveVariant::Grid => {
                let zones = cfg.grid_zones.max(1);
                let mut grid: Vec<Vec<f64>> = (0..zones)
                    .map(|_| gen_electricity(&mut rng, n, false, &cfg.electricity).load)
                    .collect();
                let z = req.zone % zones;
                (format!("zone_{} load", z + 1), grid.swap_remove(z), None)
            }
        };
        let truth = &load[n_hist..];
        let anchor = load[n_hist - 1];
        let spec = sample_binding_constraint(&mut rng, req.kind, truth, anchor);
        if !acceptable(truth, &spec) {
            continue;
        }
        let mut env = BTreeMap::new();
        env.insert("VAL".to_string(), Value::Series(series("load", 0, load[..n_hist].to_vec())?));
        let cov_names = covariates.as_ref().map(|covs| {
            let cols = covs
                .iter()
                .map(|c| series(&c.name, 0, c.values[..n_hist].to_vec()))
                .collect::<Result<Vec<_>, _>>();
            (covs.iter().map(|c| c.name.clone()).collect::<Vec<_>>(), cols)
        });
        let names = match cov_names {
            Some((names, cols)) => {
                env.insert("COV".to_string(), Value::Frame(Frame::new(cols?)?));
                Some(names)
            }
            None => None,
        };
        let question = predictive_question(
            &target,
            names.as_deref(),
            n_hist,
            horizon,
            UNIT,
            Some((spec.kind, spec.value)),
        )?;
        return Ok(TaskInstance {
            id: req.id.clone(),
            family: req.family.clone(),
            kind: TaskKind::Predictive,
            question,
            env,
            constraint: Some(spec),
            knowledge: None,
            horizon: Some(horizon),
            ground_truth: Value::Series(series("load", n_hist, truth.to_vec())?),
            output_contract: OutputContract {
                kind: ValueKind::Series,
                length: Some(horizon),
                dim: None,
            },
            quality_threshold: DEFAULT_QUALITY_THRESHOLD,
            seed: req.seed,
        });
    }
    Err(GenError::InfeasibleSample {
        id: req.id.clone(),
        attempts: MAX_ATTEMPTS,
    })
}

pub fn make_anomaly_task(
    id: String,
    family: String,
    seed: u64,
    variant: AnomalyVariant,
    cfg: &AnomalyConfig,
) -> Result<TaskInstance, GenError> {
    let mut rng = seeded(seed);
    let n = rng.random_range(cfg.length_range.0..=cfg.length_range.1);
    let k = rng.random_range(cfg.events_range.0..=cfg.events_range.1);
    let s = gen_temperature(&mut rng, n, k, &cfg.temperature);
    let positives = s.labels.iter().filter(|&&b| b == 1).count();
    let rate = positives as f64 / n as f64;
    let mut env = BTreeMap::new();
    env.insert("VAL".to_string(), Value::Series(series("temperature_2m", 0, s.values)?));
    let (question, knowledge) = match variant {
        AnomalyVariant::Reference => {
            env.insert("NORM_VAL".to_string(), Value::Series(series("temperature_2m", 0, s.reference)?));
            (anomaly_question(n, None)?, None)
        }
        AnomalyVariant::Rate => {
            env.insert("ANOMALY_RATE".to_string(), Value::Scalar(rate));
            (
                anomaly_question(n, Some(rate))?,
                Some(Knowledge {
                    anomaly_rate: Some(rate),
                    relation_ratio: None,
                }),
            )
        }
    };
    Ok(TaskInstance {
        id,
        family,
        kind: TaskKind::DiagnosticAnomaly,
        question,
        env,
        constraint: None,
        knowledge,
        horizon: None,
        ground_truth: Value::BinVec(s.labels),
        output_contract: OutputContract {
            kind: ValueKind::BinVec,
            length: Some(n),
            dim: None,
        },
        quality_threshold: DEFAULT_QUALITY_THRESHOLD,
        seed,
    })
}

pub fn make_causal_task(id: String, family: String, seed: u64, cfg: &CausalConfig) -> Result<TaskInstance, GenError> {
    let mut rng = seeded(seed);
    let d = rng.random_range(cfg.variables_range.0..=cfg.variables_range.1);
    let target_ratio = rng.random_range(cfg.ratio_range.0..cfg.ratio_range.1);
    let relation = sample_relation(&mut rng, d, target_ratio);
    let (frame, truth) = gen_causal_dataset(&mut rng, &relation, &cfg.data)?;
    let ratio = truth.off_diagonal_ones() as f64 / (d * (d - 1)) as f64;
    let question = causal_question(&variable_names(d), ratio)?;
    Ok(TaskInstance {
        id,
        family,
        kind: TaskKind::DiagnosticCausal,
        question,
        env: BTreeMap::from([("VAL".to_string(), Value::Frame(frame))]),
        constraint: None,
        knowledge: Some(Knowledge {
            anomaly_rate: None,
            relation_ratio: Some(ratio),
        }),
        horizon: None,
        ground_truth: Value::Matrix(truth),
        output_contract: OutputContract {
            kind: ValueKind::Matrix,
            length: Some(d),
            dim: Some(d),
        },
        quality_threshold: DEFAULT_QUALITY_THRESHOLD,
        seed,
    })
}
