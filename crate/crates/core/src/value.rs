//! Runtime values bound to plan variables.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{OpError, OpResult};
use crate::series::{Frame, Matrix, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub stat: f64,
    pub p_value: f64,
    pub verdict: bool,
}

/// A fitted autoregressive model: `y_t = intercept + Σ coef[k] · y_{t-1-k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub id: String,
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl FittedModel {
    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    /// One-step prediction given the history so far (most recent last).
    pub fn predict_next(&self, history: &[f64]) -> f64 {
        let n = history.len();
        self.intercept
            + self
                .coefficients
                .iter()
                .enumerate()
                .map(|(k, c)| c * history[n - 1 - k])
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Value {
    Series(TimeSeries),
    Frame(Frame),
    Scalar(f64),
    IntVec(Vec<i64>),
    BinVec(Vec<u8>),
    Matrix(Matrix),
    Text(String),
    TestResult(TestResult),
    ModelHandle(FittedModel),
}

/// Static kind of a value, used by the plan validator and output contracts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Series,
    Frame,
    Scalar,
    IntVec,
    BinVec,
    Matrix,
    Text,
    TestResult,
    ModelHandle,
}

impl fmt::Display for ValueKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ValueKind::Series => "series",
            ValueKind::Frame => "frame",
            ValueKind::Scalar => "scalar",
            ValueKind::IntVec => "intvec",
            ValueKind::BinVec => "binvec",
            ValueKind::Matrix => "matrix",
            ValueKind::Text => "text",
            ValueKind::TestResult => "test_result",
            ValueKind::ModelHandle => "model_handle",
        };
        f.write_str(s)
    }
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Series(_) => ValueKind::Series,
            Value::Frame(_) => ValueKind::Frame,
            Value::Scalar(_) => ValueKind::Scalar,
            Value::IntVec(_) => ValueKind::IntVec,
            Value::BinVec(_) => ValueKind::BinVec,
            Value::Matrix(_) => ValueKind::Matrix,
            Value::Text(_) => ValueKind::Text,
            Value::TestResult(_) => ValueKind::TestResult,
            Value::ModelHandle(_) => ValueKind::ModelHandle,
        }
    }

    /// Length along the time axis where one exists.
    pub fn len(&self) -> Option<usize> {
        match self {
            Value::Series(s) => Some(s.len()),
            Value::Frame(f) => Some(f.len()),
            Value::IntVec(v) => Some(v.len()),
            Value::BinVec(v) => Some(v.len()),
            Value::Matrix(m) => Some(m.rows()),
            _ => None,
        }
    }

    pub fn bin_vec(bits: Vec<u8>) -> OpResult<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(OpError::DomainError(
                "binary vector entries must be 0 or 1".into(),
            ));
        }
        Ok(Value::BinVec(bits))
    }

    /// Short human-readable description for traces and feedback.
    pub fn summary(&self) -> String {
        match self {
            Value::Series(s) => format!("series[{}]", s.len()),
            Value::Frame(f) => format!("frame[{}x{}]", f.len(), f.width()),
            Value::Scalar(x) => format!("scalar({x})"),
            Value::IntVec(v) => format!("intvec[{}]", v.len()),
            Value::BinVec(v) => format!("binvec[{}]", v.len()),
            Value::Matrix(m) => format!("matrix[{}x{}]", m.rows(), m.cols()),
            Value::Text(t) => format!("text({} chars)", t.len()),
            Value::TestResult(r) => format!("test(stat={}, p={})", r.stat, r.p_value),
            Value::ModelHandle(m) => format!("model({})", m.id),
        }
    }
}
