//! Template-driven decomposer. Reads the task the way a model would (question
//! text plus the names in the environment) and reacts to feedback by rule.

use std::fmt::Write as _;
use std::sync::OnceLock;

use regex::Regex;

use super::{DecomposeError, Decomposer};
use crate::constraint::{parse_constraint, ConstraintKind, ConstraintSpec};
use crate::executor::feedback::{Feedback, FeedbackTurn};
use crate::task::{TaskKind, TaskView};
use crate::value::ValueKind;

const UNI_MODELS: &[&str] = &["holt_winters", "ar_ls", "seasonal_naive"];
const COV_MODELS: &[&str] = &["lagged_regression", "holt_winters", "ar_ls", "seasonal_naive"];

/// Deliberate mistakes used to exercise the repair path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// The first predictive draft calls `RefGenOP` where `project` belongs.
    UnimplementedFirst,
}

#[derive(Debug, Clone, Default)]
pub struct ScriptedDecomposer {
    /// Leave out the constraint projection step (ablation).
    pub no_project: bool,
    pub fault: Option<Fault>,
}

fn number(x: f64) -> String {
    format!("{x}")
}

fn horizon_from_question(q: &str) -> Option<usize> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"forecast for the next (\d+)").unwrap());
    re.captures(q)?[1].parse().ok()
}

fn ratio_from_question(q: &str) -> Option<f64> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(\d+(?:\.\d+)?)% of the variable pairs").unwrap());
    let pct: f64 = re.captures(q)?[1].parse().ok()?;
    Some((pct * 1e4).round() / 1e6)
}

/// Operator named in an UnimplementedOp message and the suggested substitute.
fn substitution(message: &str) -> Option<(String, String)> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"operator `(\w+)` is not available here; use (\w+)").unwrap());
    let c = re.captures(message)?;
    Some((c[1].to_string(), c[2].to_string()))
}

impl ScriptedDecomposer {
    fn predictive(&self, task: &TaskView, model: &str, unimplemented: bool) -> Result<String, DecomposeError> {
        let horizon = task
            .horizon
            .or_else(|| horizon_from_question(task.question))
            .ok_or_else(|| DecomposeError::UnknownTaskKind("predictive task without a horizon".into()))?;
        let constraint: Option<ConstraintSpec> =
            parse_constraint(task.question).map_err(|e| DecomposeError::UnknownTaskKind(e.to_string()))?;
        let project = constraint.filter(|_| !self.no_project);
        let target = if project.is_some() { "FORECAST" } else { "FINAL_RESULT" };
        let mut out = String::new();
        if task.env_kind("COV") == Some(ValueKind::Frame) {
            let _ = writeln!(
                out,
                "{target} = forecast_multi(data=VAL, covariates=COV, future_length={horizon}, model=\"{model}\")"
            );
        } else {
            let _ = writeln!(out, "{target} = forecast_uni(data=VAL, future_length={horizon}, model=\"{model}\")");
        }
        if let Some(c) = project {
            let op = if unimplemented { "RefGenOP" } else { "project" };
            let anchor = if c.kind == ConstraintKind::RampRate { ", anchor=VAL" } else { "" };
            let _ = writeln!(
                out,
                "FINAL_RESULT = {op}(data=FORECAST, kind=\"{}\", value={}{anchor})",
                c.kind,
                number(c.value)
            );
        }
        Ok(out)
    }

    fn anomaly(&self, task: &TaskView) -> String {
        if task.env.contains_key("NORM_VAL") {
            "NORM_SCORE = AnomalDetOP(data=NORM_VAL)\n\
             THRES = calibrateThreshOP(data=NORM_SCORE)\n\
             TEST_SCORE = AnomalDetOP(data=VAL)\n\
             FINAL_RESULT = convertBinaryOP(data=TEST_SCORE, threshold=THRES)\n"
                .to_string()
        } else if task.env.contains_key("ANOMALY_RATE") {
            "TEST_SCORE = AnomalDetOP(data=VAL)\n\
             FINAL_RESULT = convertBinaryOP(data=TEST_SCORE, percentile=ANOMALY_RATE)\n"
                .to_string()
        } else {
            "FINAL_RESULT = detectSpikesOP(data=VAL)\n".to_string()
        }
    }

    fn causal(&self, task: &TaskView) -> Result<String, DecomposeError> {
        let ratio = ratio_from_question(task.question)
            .or_else(|| task.knowledge.and_then(|k| k.relation_ratio))
            .ok_or_else(|| DecomposeError::UnknownTaskKind("causal task without a relation ratio".into()))?;
        Ok(format!(
            "PVALUES = CausalMatrixOP(data=VAL)\nFINAL_RESULT = select_top_ratio(data=PVALUES, ratio={})\n",
            number(ratio)
        ))
    }
}

impl Decomposer for ScriptedDecomposer {
    fn name(&self) -> &str {
        "scripted"
    }

    fn propose(&self, task: &TaskView, history: &[FeedbackTurn]) -> Result<String, DecomposeError> {
        let last = history.last();
        if let Some(turn) = last {
            if let Some(Feedback::Error { code, message, .. }) = Feedback::parse(&turn.message) {
                if code == "UnimplementedOp" {
                    if let Some((bad, good)) = substitution(&message) {
                        return Ok(turn.proposal.replace(&format!("{bad}("), &format!("{good}(")));
                    }
                }
            }
        }
        match task.kind {
            TaskKind::Predictive => {
                let models = if task.env_kind("COV") == Some(ValueKind::Frame) {
                    COV_MODELS
                } else {
                    UNI_MODELS
                };
                let chosen = match last.and_then(|t| Feedback::parse(&t.message)) {
                    Some(Feedback::BufferSummary(items)) => items
                        .iter()
                        .min_by(|a, b| a.1.total_cmp(&b.1))
                        .map(|(m, _)| m.clone()),
                    _ => None,
                };
                let model = chosen.unwrap_or_else(|| {
                    let tried = history
                        .iter()
                        .filter(|t| matches!(Feedback::parse(&t.message), Some(Feedback::Quality { .. })))
                        .count();
                    models[tried.min(models.len() - 1)].to_string()
                });
                let faulty = history.is_empty() && self.fault == Some(Fault::UnimplementedFirst);
                self.predictive(task, &model, faulty)
            }
            TaskKind::DiagnosticAnomaly => Ok(self.anomaly(task)),
            TaskKind::DiagnosticCausal => self.causal(task),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_parsing() {
        let q = "I know that 41.6667% of the variable pairs have relationship.";
        assert_eq!(ratio_from_question(q), Some(0.416667));
    }

    #[test]
    fn substitution_reads_hint() {
        let m = "step 1 (`FINAL_RESULT`): operator `RefGenOP` is not available here; use project to make it fit";
        assert_eq!(substitution(m), Some(("RefGenOP".into(), "project".into())));
    }
}
