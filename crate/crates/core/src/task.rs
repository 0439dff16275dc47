//! Task instances: question, environment data, constraint, hidden ground
//! truth and the expected shape of an answer.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::constraint::ConstraintSpec;
use crate::plan::EnvTypes;
use crate::value::{Value, ValueKind};

/// Backtest MAPE at or below which a forecast plan is accepted at once.
pub const DEFAULT_QUALITY_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Predictive,
    DiagnosticAnomaly,
    DiagnosticCausal,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Knowledge {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomaly_rate: Option<f64>,
    /// Fraction of ordered off-diagonal pairs that are true edges.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relation_ratio: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputContract {
    pub kind: ValueKind,
    /// Required length (series, binvec) or row count (matrix).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    /// Required column count for matrices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskInstance {
    pub id: String,
    pub family: String,
    pub kind: TaskKind,
    pub question: String,
    pub env: BTreeMap<String, Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraint: Option<ConstraintSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub knowledge: Option<Knowledge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    pub ground_truth: Value,
    pub output_contract: OutputContract,
    #[serde(default = "default_tau")]
    pub quality_threshold: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_tau() -> f64 {
    DEFAULT_QUALITY_THRESHOLD
}

/// What a decomposer may see of a task: everything except the ground truth.
#[derive(Debug, Clone, Copy)]
pub struct TaskView<'a> {
    pub id: &'a str,
    pub kind: TaskKind,
    pub question: &'a str,
    pub env: &'a BTreeMap<String, Value>,
    pub knowledge: Option<&'a Knowledge>,
    pub horizon: Option<usize>,
    pub output_contract: OutputContract,
}

impl TaskView<'_> {
    pub fn env_kind(&self, name: &str) -> Option<ValueKind> {
        self.env.get(name).map(Value::kind)
    }
}

impl TaskInstance {
    pub fn view(&self) -> TaskView<'_> {
        TaskView {
            id: &self.id,
            kind: self.kind,
            question: &self.question,
            env: &self.env,
            knowledge: self.knowledge.as_ref(),
            horizon: self.horizon,
            output_contract: self.output_contract,
        }
    }

    pub fn env_types(&self) -> EnvTypes {
        self.env.iter().map(|(k, v)| (k.clone(), Some(v.kind()))).collect()
    }
}
