//! Synthetic benchmark generation.
//!
//! Every task is generated from its own seed, `derive_seed(master ^
//! label_hash(family), index)`, so one task can be regenerated without the
//! rest and the filter does not change the tasks that remain.

pub mod causal;
pub mod series;
mod tasks;
pub mod templates;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use tasks::{
    make_anomaly_task, make_causal_task, make_predictive_task, sample_binding_constraint, AnomalyConfig,
    AnomalyVariant, CausalConfig, PredictiveConfig, PredictiveRequest, PredictiveVariant, MAX_ATTEMPTS,
};
pub use templates::TemplateError;

use crate::constraint::ConstraintKind;
use crate::error::OpError;
use crate::rng::{derive_seed, label_hash};
use crate::task::TaskInstance;

#[derive(Debug, Error)]
pub enum GenError {
    #[error("task `{id}`: no feasible sample after {attempts} attempts")]
    InfeasibleSample { id: String, attempts: usize },
    #[error(transparent)]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Op(#[from] OpError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    pub master_seed: u64,
    pub predictive_per_kind: usize,
    pub predictive_variants: Vec<PredictiveVariant>,
    pub anomaly_per_variant: usize,
    pub causal_count: usize,
    /// Family names or groups (`anomaly`, `predictive-cov`) to keep; empty keeps all.
    pub families: Vec<String>,
    pub predictive: PredictiveConfig,
    pub anomaly: AnomalyConfig,
    pub causal: CausalConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            master_seed: 0,
            predictive_per_kind: 20,
            predictive_variants: PredictiveVariant::ALL.to_vec(),
            anomaly_per_variant: 25,
            causal_count: 25,
            families: Vec::new(),
            predictive: PredictiveConfig::default(),
            anomaly: AnomalyConfig::default(),
            causal: CausalConfig::default(),
        }
    }
}

/// `filter` names either one family or a group such as `predictive` or
/// `anomaly`.
fn matches_filter(family: &str, filter: &str) -> bool {
    family == filter || family.strip_prefix(filter).is_some_and(|rest| rest.starts_with(':'))
}

impl BenchConfig {
    fn keeps(&self, family: &str) -> bool {
        self.families.is_empty() || self.families.iter().any(|f| matches_filter(family, f))
    }
}

/// Every family name `generate` can produce, regardless of counts.
pub fn all_families() -> Vec<String> {
    let mut out = Vec::new();
    for variant in PredictiveVariant::ALL {
        for kind in ConstraintKind::ALL {
            out.push(format!("{}:{}", variant.family_prefix(), kind.as_str()));
        }
    }
    out.extend(["anomaly:reference", "anomaly:rate", "causal"].map(String::from));
    out
}

/// Whether `filter` selects at least one family.
pub fn is_known_family(filter: &str) -> bool {
    all_families().iter().any(|f| matches_filter(f, filter))
}

pub fn family_seed(master: u64, family: &str, index: usize) -> u64 {
    derive_seed(master ^ label_hash(family), index as u64)
}

pub fn task_id(family: &str, index: usize) -> String {
    format!("{}-{index:03}", family.replace(':', "_"))
}

/// Every family the configuration asks for, in a fixed order.
pub fn generate(cfg: &BenchConfig) -> Result<Vec<TaskInstance>, GenError> {
    let mut out = Vec::new();
    for &variant in &cfg.predictive_variants {
        for kind in ConstraintKind::ALL {
            let family = format!("{}:{}", variant.family_prefix(), kind.as_str());
            if !cfg.keeps(&family) {
                continue;
            }
            for i in 0..cfg.predictive_per_kind {
                out.push(make_predictive_task(&PredictiveRequest {
                    id: task_id(&family, i),
                    family: family.clone(),
                    seed: family_seed(cfg.master_seed, &family, i),
                    kind,
                    variant,
                    zone: i,
                    cfg: &cfg.predictive,
                })?);
            }
        }
    }
    for (variant, family) in [
        (AnomalyVariant::Reference, "anomaly:reference"),
        (AnomalyVariant::Rate, "anomaly:rate"),
    ] {
        if !cfg.keeps(family) {
            continue;
        }
        for i in 0..cfg.anomaly_per_variant {
            let seed = family_seed(cfg.master_seed, family, i);
            out.push(make_anomaly_task(task_id(family, i), family.into(), seed, variant, &cfg.anomaly)?);
        }
    }
    if cfg.keeps("causal") {
        for i in 0..cfg.causal_count {
            let seed = family_seed(cfg.master_seed, "causal", i);
            out.push(make_causal_task(task_id("causal", i), "causal".into(), seed, &cfg.causal)?);
        }
    }
    Ok(out)
}
