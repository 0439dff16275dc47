//! Two-stage scoring: validate an answer, then measure it; aggregate into a
//! per-family report.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraint::{check, ConstraintKind, ConstraintSpec, TOL};
use crate::executor::ExecOutcome;
use crate::metrics::{f1_binary, mape_guarded, pair_accuracy, Metric, Quality};
use crate::series::Matrix;
use crate::stats::moments::{is_constant, mean, sample_std};
use crate::task::{TaskInstance, TaskKind};
use crate::value::{Value, ValueKind};

pub const REPORT_SCHEMA: u32 = 1;

/// Stage-one failure reasons, in checking order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Reason {
    ExecutionFailed,
    ShapeMismatch,
    ConstraintViolated,
    TrivialOutput,
    UnreasonableMape,
}

impl Reason {
    pub const ALL: [Reason; 5] = [
        Reason::ExecutionFailed,
        Reason::ShapeMismatch,
        Reason::ConstraintViolated,
        Reason::TrivialOutput,
        Reason::UnreasonableMape,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Reason::ExecutionFailed => "ExecutionFailed",
            Reason::ShapeMismatch => "ShapeMismatch",
            Reason::ConstraintViolated => "ConstraintViolated",
            Reason::TrivialOutput => "TrivialOutput",
            Reason::UnreasonableMape => "UnreasonableMape",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rejection {
    pub reason: Reason,
    pub detail: String,
}

impl Rejection {
    pub fn new(reason: Reason, detail: impl Into<String>) -> Self {
        Self {
            reason,
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage1 {
    pub passed: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<Reason>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub task_id: String,
    pub family: String,
    pub stage1: Stage1,
    /// Present exactly when stage one passed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stage2: Option<Quality>,
}

impl EvalResult {
    pub fn passed(&self) -> bool {
        self.stage1.passed
    }

    pub fn reason(&self) -> Option<Reason> {
        self.stage1.reason
    }
}

/// The answer in the contract's own shape.
enum Answer<'a> {
    Series(&'a [f64]),
    Labels(Vec<u8>),
    Adjacency(&'a Matrix),
}

fn shape_error(detail: String) -> Rejection {
    Rejection::new(Reason::ShapeMismatch, detail)
}

fn conform<'a>(output: &'a Value, task: &TaskInstance) -> Result<Answer<'a>, Rejection> {
    let contract = task.output_contract;
    let want_len = |n: usize| match contract.length {
        Some(len) if len != n => Err(shape_error(format!("expected length {len}, got {n}"))),
        _ => Ok(()),
    };
    match (contract.kind, output) {
        (ValueKind::Series, Value::Series(s)) => {
            want_len(s.len())?;
            if s.values().iter().any(|v| !v.is_finite()) {
                return Err(shape_error("forecast contains non-finite values".into()));
            }
            Ok(Answer::Series(s.values()))
        }
        (ValueKind::BinVec, Value::BinVec(b)) => {
            want_len(b.len())?;
            if b.iter().any(|&x| x > 1) {
                return Err(shape_error("labels must be 0 or 1".into()));
            }
            Ok(Answer::Labels(b.clone()))
        }
        (ValueKind::BinVec, Value::IntVec(v)) => {
            want_len(v.len())?;
            if v.iter().any(|&x| x != 0 && x != 1) {
                return Err(shape_error("labels must be 0 or 1".into()));
            }
            Ok(Answer::Labels(v.iter().map(|&x| x as u8).collect()))
        }
        (ValueKind::Matrix, Value::Matrix(m)) => {
            if let Some(rows) = contract.length {
                if m.rows() != rows {
                    return Err(shape_error(format!("expected {rows} rows, got {}", m.rows())));
                }
            }
            if let Some(cols) = contract.dim {
                if m.cols() != cols {
                    return Err(shape_error(format!("expected {cols} columns, got {}", m.cols())));
                }
            }
            if !m.is_square() || !m.is_binary() {
                return Err(shape_error("expected a square 0/1 matrix".into()));
            }
            Ok(Answer::Adjacency(m))
        }
        (want, got) => Err(shape_error(format!("expected {want}, got {}", got.kind()))),
    }
}

/// A constraint whose only feasible outputs are constant.
fn forces_constant(spec: Option<&ConstraintSpec>) -> bool {
    spec.is_some_and(|s| {
        matches!(s.kind, ConstraintKind::Variability | ConstraintKind::RampRate) && s.value.abs() <= TOL
    })
}

fn truth_series(task: &TaskInstance) -> Result<&[f64], Rejection> {
    match &task.ground_truth {
        Value::Series(s) => Ok(s.values()),
        other => Err(shape_error(format!("task truth is {}, not a series", other.kind()))),
    }
}

fn truth_labels(task: &TaskInstance) -> Result<&[u8], Rejection> {
    match &task.ground_truth {
        Value::BinVec(b) => Ok(b),
        other => Err(shape_error(format!("task truth is {}, not labels", other.kind()))),
    }
}

fn truth_matrix(task: &TaskInstance) -> Result<&Matrix, Rejection> {
    match &task.ground_truth {
        Value::Matrix(m) => Ok(m),
        other => Err(shape_error(format!("task truth is {}, not a matrix", other.kind()))),
    }
}

/// (positives, total) over the off-diagonal entries.
fn off_diagonal_counts(m: &Matrix) -> (usize, usize) {
    let d = m.rows();
    (m.off_diagonal_ones(), d * d.saturating_sub(1))
}

fn degenerate(positives: usize, total: usize) -> bool {
    positives == 0 || positives == total
}

/// Stage one. The first failing check decides the reason.
pub fn validate_solution(output: &Value, task: &TaskInstance) -> Result<(), Rejection> {
    let answer = conform(output, task)?;
    match answer {
        Answer::Series(y) => {
            if let Some(spec) = &task.constraint {
                let violations = check(y, spec).map_err(|e| shape_error(e.to_string()))?;
                if let Some(v) = violations.first() {
                    return Err(Rejection::new(
                        Reason::ConstraintViolated,
                        format!("{} exceeded by {:.6} at {} points", v.kind.as_str(), v.magnitude, v.indices.len()),
                    ));
                }
            }
            if is_constant(y) && !forces_constant(task.constraint.as_ref()) {
                return Err(Rejection::new(Reason::TrivialOutput, "constant forecast"));
            }
            let truth = truth_series(task)?;
            let m = mape_guarded(truth, y).map_err(|e| shape_error(e.to_string()))?;
            if m >= 1.0 {
                return Err(Rejection::new(Reason::UnreasonableMape, format!("mape {m:.4}")));
            }
        }
        Answer::Labels(pred) => {
            let truth = truth_labels(task)?;
            let t_pos = truth.iter().filter(|&&b| b != 0).count();
            let p_pos = pred.iter().filter(|&&b| b != 0).count();
            if !degenerate(t_pos, truth.len()) && degenerate(p_pos, pred.len()) {
                return Err(Rejection::new(Reason::TrivialOutput, "labels are all equal"));
            }
        }
        Answer::Adjacency(pred) => {
            let truth = truth_matrix(task)?;
            let (t_pos, total) = off_diagonal_counts(truth);
            let (p_pos, _) = off_diagonal_counts(pred);
            if !degenerate(t_pos, total) && degenerate(p_pos, total) {
                return Err(Rejection::new(Reason::TrivialOutput, "relation matrix is all equal off the diagonal"));
            }
        }
    }
    Ok(())
}

pub fn metric_for(kind: TaskKind) -> Metric {
    match kind {
        TaskKind::Predictive => Metric::Mape,
        TaskKind::DiagnosticAnomaly => Metric::F1,
        TaskKind::DiagnosticCausal => Metric::Accuracy,
    }
}

/// Stage two; call only on answers that passed stage one.
pub fn score_solution(output: &Value, task: &TaskInstance) -> Result<Quality, Rejection> {
    let metric = metric_for(task.kind);
    let value = match conform(output, task)? {
        Answer::Series(y) => mape_guarded(truth_series(task)?, y),
        Answer::Labels(pred) => f1_binary(truth_labels(task)?, &pred),
        Answer::Adjacency(pred) => pair_accuracy(truth_matrix(task)?, pred),
    }
    .map_err(|e| shape_error(e.to_string()))?;
    Ok(Quality { metric, value })
}

/// Both stages on one answer.
pub fn evaluate(output: &Value, task: &TaskInstance) -> EvalResult {
    let checked = validate_solution(output, task).and_then(|()| score_solution(output, task));
    match checked {
        Ok(q) => EvalResult {
            task_id: task.id.clone(),
            family: task.family.clone(),
            stage1: Stage1 {
                passed: true,
                reason: None,
                detail: None,
            },
            stage2: Some(q),
        },
        Err(r) => rejected(task, r),
    }
}

/// A stage-one failure decided outside [`validate_solution`], such as an
/// answer file that cannot be read.
pub fn rejected(task: &TaskInstance, r: Rejection) -> EvalResult {
    EvalResult {
        task_id: task.id.clone(),
        family: task.family.clone(),
        stage1: Stage1 {
            passed: false,
            reason: Some(r.reason),
            detail: Some(r.detail),
        },
        stage2: None,
    }
}

/// A task that produced no answer at all.
pub fn execution_failed(task: &TaskInstance, detail: impl Into<String>) -> EvalResult {
    rejected(task, Rejection::new(Reason::ExecutionFailed, detail))
}

pub fn evaluate_outcome(outcome: &ExecOutcome, task: &TaskInstance) -> EvalResult {
    match outcome {
        ExecOutcome::Success { result, .. } => evaluate(result, task),
        ExecOutcome::Failure { error } => execution_failed(task, format!("{}: {}", error.code, error.message)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("no results to aggregate")]
    EmptyResults,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyReport {
    pub family: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric: Option<Metric>,
    pub total: usize,
    pub passed: usize,
    pub success_rate: f64,
    /// Over passing tasks only; absent when none passed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    /// Sample standard deviation over passing tasks; 0 for a single pass.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub std: Option<f64>,
    pub errors: BTreeMap<Reason, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    pub total: usize,
    pub passed: usize,
    pub success_rate: f64,
    pub families: Vec<FamilyReport>,
    pub results: Vec<EvalResult>,
}

fn family_report(family: &str, results: &[&EvalResult]) -> FamilyReport {
    let values: Vec<f64> = results.iter().filter_map(|r| r.stage2.map(|q| q.value)).collect();
    let metric = results.iter().find_map(|r| r.stage2.map(|q| q.metric));
    let mut errors = BTreeMap::new();
    for r in results {
        if let Some(reason) = r.reason() {
            *errors.entry(reason).or_insert(0) += 1;
        }
    }
    let (mean_v, std_v) = match values.len() {
        0 => (None, None),
        1 => (Some(values[0]), Some(0.0)),
        _ => (Some(mean(&values)), Some(sample_std(&values))),
    };
    FamilyReport {
        family: family.to_string(),
        metric,
        total: results.len(),
        passed: values.len(),
        success_rate: values.len() as f64 / results.len() as f64,
        mean: mean_v,
        std: std_v,
        errors,
    }
}

/// Per-family statistics. Results are sorted by task id first, so the input
/// order never changes the report.
pub fn aggregate(results: &[EvalResult]) -> Result<Report, EvalError> {
    if results.is_empty() {
        return Err(EvalError::EmptyResults);
    }
    let mut sorted = results.to_vec();
    sorted.sort_by(|a, b| a.task_id.cmp(&b.task_id));
    let mut by_family: BTreeMap<&str, Vec<&EvalResult>> = BTreeMap::new();
    for r in &sorted {
        by_family.entry(r.family.as_str()).or_default().push(r);
    }
    let families: Vec<FamilyReport> = by_family.iter().map(|(f, rs)| family_report(f, rs)).collect();
    let passed = sorted.iter().filter(|r| r.passed()).count();
    Ok(Report {
        schema: REPORT_SCHEMA,
        total: sorted.len(),
        passed,
        success_rate: passed as f64 / sorted.len() as f64,
        families,
        results: sorted,
    })
}

impl Report {
    pub fn family(&self, name: &str) -> Option<&FamilyReport> {
        self.families.iter().find(|f| f.family == name)
    }

    /// Plain-text table: one row per family with success rate, metric
    /// mean (std) and failure counts.
    pub fn render_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<32} {:>5} {:>12} {:>20}  failures",
            "family", "n", "success", "metric mean (std)"
        );
        for f in &self.families {
            let metric = match (f.metric, f.mean, f.std) {
                (Some(m), Some(mu), Some(sd)) => format!("{} {:.4} ({:.4})", m.name(), mu, sd),
                _ => "-".to_string(),
            };
            let failures = f
                .errors
                .iter()
                .map(|(r, n)| format!("{}={n}", r.as_str()))
                .collect::<Vec<_>>()
                .join(" ");
            let _ = writeln!(
                out,
                "{:<32} {:>5} {:>12.4} {:>20}  {}",
                f.family, f.total, f.success_rate, metric, failures
            );
        }
        let _ = writeln!(out, "{:<32} {:>5} {:>12.4}", "all", self.total, self.success_rate);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraint::project;
    use crate::series::TimeSeries;
    use crate::task::{OutputContract, DEFAULT_QUALITY_THRESHOLD};

    fn predictive(truth: Vec<f64>, spec: Option<ConstraintSpec>) -> TaskInstance {
        TaskInstance {
            id: "p-000".into(),
            family: "predictive:max_load".into(),
            kind: TaskKind::Predictive,
            question: String::new(),
            env: BTreeMap::new(),
            constraint: spec,
            knowledge: None,
            horizon: Some(truth.len()),
            output_contract: OutputContract {
                kind: ValueKind::Series,
                length: Some(truth.len()),
                dim: None,
            },
            ground_truth: Value::Series(TimeSeries::from_values("y", truth).unwrap()),
            quality_threshold: DEFAULT_QUALITY_THRESHOLD,
            seed: 0,
        }
    }

    fn series(v: Vec<f64>) -> Value {
        Value::Series(TimeSeries::from_values("f", v).unwrap())
    }

    #[test]
    fn projected_forecast_passes() {
        let truth = vec![100.0, 110.0, 120.0, 105.0];
        let spec = ConstraintSpec::new(ConstraintKind::MaxLoad, 115.0);
        let task = predictive(truth.clone(), Some(spec));
        let out = series(project(&truth, &spec).unwrap());
        let r = evaluate(&out, &task);
        assert!(r.passed(), "{r:?}");
        assert!((r.stage2.unwrap().value - 5.0 / 120.0 / 4.0).abs() < 1e-12);
    }

    #[test]
    fn reasons_in_order() {
        let spec = ConstraintSpec::new(ConstraintKind::MaxLoad, 115.0);
        let task = predictive(vec![100.0, 110.0, 120.0, 105.0], Some(spec));
        let reason = |v: Value| evaluate(&v, &task).reason();
        assert_eq!(reason(series(vec![1.0; 3])), Some(Reason::ShapeMismatch));
        assert_eq!(reason(Value::Scalar(1.0)), Some(Reason::ShapeMismatch));
        assert_eq!(reason(series(vec![100.0, 200.0, 100.0, 100.0])), Some(Reason::ConstraintViolated));
        assert_eq!(reason(series(vec![100.0; 4])), Some(Reason::TrivialOutput));
        let t2 = predictive(vec![10.0; 4], None);
        let r = evaluate(&series(vec![22.0, 22.0, 22.0, 23.0]), &t2);
        assert_eq!(r.reason(), Some(Reason::UnreasonableMape));
        assert!(r.stage2.is_none());
    }

    #[test]
    fn constant_allowed_when_forced() {
        let spec = ConstraintSpec::new(ConstraintKind::Variability, 0.0);
        let task = predictive(vec![10.0, 11.0, 12.0], Some(spec));
        assert!(evaluate(&series(vec![11.0; 3]), &task).passed());
    }

    #[test]
    fn trivial_labels() {
        let task = TaskInstance {
            id: "a-000".into(),
            family: "anomaly:reference".into(),
            kind: TaskKind::DiagnosticAnomaly,
            output_contract: OutputContract {
                kind: ValueKind::BinVec,
                length: Some(6),
                dim: None,
            },
            ground_truth: Value::BinVec(vec![0, 1, 0, 1, 1, 0]),
            ..predictive(vec![1.0], None)
        };
        assert_eq!(evaluate(&Value::BinVec(vec![0; 6]), &task).reason(), Some(Reason::TrivialOutput));
        let r = evaluate(&Value::IntVec(vec![0, 1, 0, 1, 1, 0]), &task);
        assert_eq!(r.stage2.unwrap().value, 1.0);
    }

    #[test]
    fn aggregate_over_passes_only() {
        let task = predictive(vec![10.0; 4], None);
        let good = evaluate(&series(vec![9.0, 11.0, 9.0, 11.0]), &task);
        let mut results: Vec<EvalResult> = (0..9)
            .map(|i| EvalResult {
                task_id: format!("p-{i:03}"),
                ..good.clone()
            })
            .collect();
        results.push(execution_failed(&TaskInstance {
            id: "p-009".into(),
            ..task.clone()
        }, "boom"));
        let rep = aggregate(&results).unwrap();
        let f = &rep.families[0];
        assert_eq!(f.success_rate, 0.9);
        assert!((f.mean.unwrap() - 0.1).abs() < 1e-12);
        assert!(f.std.unwrap() < 1e-12);
        assert_eq!(aggregate(&results[..1]).unwrap().families[0].std, Some(0.0));
        assert_eq!(f.errors[&Reason::ExecutionFailed], 1);
        let mut rev = results.clone();
        rev.reverse();
        assert_eq!(aggregate(&rev).unwrap(), rep);
        assert_eq!(aggregate(&[]), Err(EvalError::EmptyResults));
        assert!(rep.render_table().contains("mape 0.1000 (0.0000)"));
    }
}
