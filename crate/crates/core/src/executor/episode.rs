//! The refinement loop: propose, check, execute, score, feed back.

use serde::{Deserialize, Serialize};

use super::feedback::{Feedback, FeedbackTurn};
use super::{execute_plan, forecast_model, intermediate_quality, ExecError, ExecOutcome, OutcomeSummary};
use crate::decomposer::Decomposer;
use crate::metrics::Quality;
use crate::plan::{has_errors, parse_plan, serialize_plan, validate_plan, Diagnostic, Severity};
use crate::registry::{ExecCtx, Registry};
use crate::task::TaskInstance;

pub const DEFAULT_BUDGET: usize = 6;

#[derive(Clone, Copy)]
pub struct EpisodeOptions<'a> {
    pub budget: usize,
    /// Overrides the task's own quality threshold.
    pub tau: Option<f64>,
    pub ctx: ExecCtx<'a>,
}

impl Default for EpisodeOptions<'_> {
    fn default() -> Self {
        Self {
            budget: DEFAULT_BUDGET,
            tau: None,
            ctx: ExecCtx::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    pub index: usize,
    pub proposal: String,
    /// Canonical text of the parsed plan.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<Diagnostic>,
    #[serde(default)]
    pub duplicate: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<OutcomeSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<Quality>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback_sent: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferEntry {
    pub canonical_plan: String,
    pub outcome: OutcomeSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub quality: Option<Quality>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// A plan succeeded with quality within the threshold (or unscored).
    Accepted,
    /// The decomposer went back to a buffered plan after a summary.
    SelectedFromBuffer,
    BudgetExhausted,
    DecomposerError,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub task_id: String,
    pub decomposer: String,
    pub budget: usize,
    pub iterations: Vec<Iteration>,
    pub stop: StopReason,
    #[serde(rename = "final")]
    pub final_outcome: ExecOutcome,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_plan: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub final_quality: Option<Quality>,
    pub buffer: Vec<BufferEntry>,
}

impl Iteration {
    fn new(index: usize, proposal: String) -> Self {
        Self {
            index,
            proposal,
            plan: None,
            diagnostics: Vec::new(),
            duplicate: false,
            outcome: None,
            quality: None,
            feedback_sent: None,
        }
    }
}

struct Loop<'t> {
    task: &'t TaskInstance,
    tau: f64,
    iterations: Vec<Iteration>,
    history: Vec<FeedbackTurn>,
    buffer: Vec<BufferEntry>,
    /// Full outcomes parallel to `buffer`.
    outcomes: Vec<ExecOutcome>,
    last_failure: Option<(ExecOutcome, Option<String>)>,
}

impl Loop<'_> {
    fn send(&mut self, mut it: Iteration, fb: Feedback) {
        let msg = fb.render(self.tau);
        self.history.push(FeedbackTurn {
            proposal: it.proposal.clone(),
            message: msg.clone(),
        });
        it.feedback_sent = Some(msg);
        self.iterations.push(it);
    }

    fn fail(&mut self, mut it: Iteration, error: ExecError) {
        let outcome = ExecOutcome::Failure {
            error: error.clone(),
        };
        it.outcome = Some(outcome.summary());
        self.last_failure = Some((outcome, it.plan.clone()));
        let fb = Feedback::Error {
            step: error.step_index,
            code: error.code,
            message: error.message,
        };
        self.send(it, fb);
    }

    /// Buffered success with the lowest MAPE; the earliest wins ties.
    fn best(&self) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, b) in self.buffer.iter().enumerate() {
            if let (true, Some(q)) = (self.outcomes[i].is_success(), b.quality) {
                if best.is_none_or(|(_, v)| q.value < v) {
                    best = Some((i, q.value));
                }
            }
        }
        best.map(|(i, _)| i)
    }

    fn summary(&self) -> Feedback {
        Feedback::BufferSummary(
            self.buffer
                .iter()
                .zip(&self.outcomes)
                .filter(|(_, o)| o.is_success())
                .filter_map(|(b, _)| Some((b.model.clone()?, b.quality?.value)))
                .collect(),
        )
    }
}

/// Run one task to completion with at most `opts.budget` proposals.
pub fn run_episode(task: &TaskInstance, decomposer: &dyn Decomposer, opts: &EpisodeOptions) -> EpisodeTrace {
    let registry = Registry::standard();
    let env_types = task.env_types();
    let mut lp = Loop {
        task,
        tau: opts.tau.unwrap_or(task.quality_threshold),
        iterations: Vec::new(),
        history: Vec::new(),
        buffer: Vec::new(),
        outcomes: Vec::new(),
        last_failure: None,
    };
    let mut awaiting_selection = false;
    let mut done: Option<(ExecOutcome, Option<String>, Option<Quality>, StopReason)> = None;

    for t in 0..opts.budget {
        let proposal = match decomposer.propose(&lp.task.view(), &lp.history) {
            Ok(p) => p,
            Err(e) => {
                let error = ExecError {
                    step_index: None,
                    op: String::new(),
                    code: e.code().to_string(),
                    message: e.to_string(),
                };
                if e.is_fatal() {
                    let mut it = Iteration::new(t, String::new());
                    let outcome = ExecOutcome::Failure { error };
                    it.outcome = Some(outcome.summary());
                    lp.iterations.push(it);
                    done = Some((outcome, None, None, StopReason::DecomposerError));
                    break;
                }
                lp.fail(Iteration::new(t, String::new()), error);
                continue;
            }
        };
        let mut it = Iteration::new(t, proposal);
        let plan = match parse_plan(&it.proposal) {
            Ok(p) => p,
            Err(e) => {
                let error = ExecError {
                    step_index: None,
                    op: String::new(),
                    code: "SyntaxError".into(),
                    message: e.to_string(),
                };
                lp.fail(it, error);
                continue;
            }
        };
        let canonical = serialize_plan(&registry.canonical_plan(&plan));
        it.plan = Some(canonical.clone());

        if let Some(pos) = lp.buffer.iter().position(|b| b.canonical_plan == canonical) {
            it.duplicate = true;
            match lp.best() {
                Some(best) if awaiting_selection => {
                    let b = &lp.buffer[best];
                    it.outcome = Some(b.outcome.clone());
                    it.quality = b.quality;
                    done = Some((
                        lp.outcomes[best].clone(),
                        Some(b.canonical_plan.clone()),
                        b.quality,
                        StopReason::SelectedFromBuffer,
                    ));
                    lp.iterations.push(it);
                    break;
                }
                Some(_) => {
                    awaiting_selection = true;
                    it.outcome = Some(lp.buffer[pos].outcome.clone());
                    let fb = lp.summary();
                    lp.send(it, fb);
                }
                None => {
                    let mut error = lp.outcomes[pos].error().cloned().expect("buffered failures carry an error");
                    error.message = format!("this program was already tried and failed: {}", error.message);
                    lp.fail(it, error);
                }
            }
            continue;
        }

        it.diagnostics = validate_plan(&plan, &env_types, registry, Some(task.output_contract.kind));
        if has_errors(&it.diagnostics) {
            let errors: Vec<&Diagnostic> = it.diagnostics.iter().filter(|d| d.severity == Severity::Error).collect();
            let first = errors[0];
            let error = ExecError {
                step_index: Some(first.step_index),
                op: plan.steps[first.step_index].op.clone(),
                code: first.code.to_string(),
                message: errors.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; "),
            };
            lp.fail(it, error);
            continue;
        }

        let ex = execute_plan(&plan, &task.env, registry, &opts.ctx);
        if let ExecOutcome::Failure { error } = &ex.outcome {
            lp.buffer.push(BufferEntry {
                canonical_plan: canonical,
                outcome: ex.outcome.summary(),
                model: None,
                quality: None,
            });
            lp.outcomes.push(ex.outcome.clone());
            let error = error.clone();
            lp.fail(it, error);
            continue;
        }
        let scored = ex
            .steps
            .iter()
            .rev()
            .find(|s| s.forecast)
            .and_then(|s| Some((forecast_model(s), intermediate_quality(s, task)?)));
        it.outcome = Some(ex.outcome.summary());
        match scored {
            Some((model, q)) if q.value > lp.tau => {
                it.quality = Some(q);
                lp.buffer.push(BufferEntry {
                    canonical_plan: canonical,
                    outcome: ex.outcome.summary(),
                    model: Some(model.clone()),
                    quality: Some(q),
                });
                lp.outcomes.push(ex.outcome);
                lp.send(it, Feedback::Quality { model, mape: q.value });
            }
            scored => {
                let q = scored.map(|(_, q)| q);
                it.quality = q;
                lp.iterations.push(it);
                done = Some((ex.outcome, Some(canonical), q, StopReason::Accepted));
                break;
            }
        }
    }

    let (final_outcome, final_plan, final_quality, stop) = done.unwrap_or_else(|| {
        if let Some(best) = lp.best() {
            let b = &lp.buffer[best];
            return (
                lp.outcomes[best].clone(),
                Some(b.canonical_plan.clone()),
                b.quality,
                StopReason::BudgetExhausted,
            );
        }
        let (outcome, plan) = lp.last_failure.clone().unwrap_or_else(|| {
            (
                ExecOutcome::Failure {
                    error: ExecError {
                        step_index: None,
                        op: String::new(),
                        code: "NoResult".into(),
                        message: "no proposal was made".into(),
                    },
                },
                None,
            )
        });
        (outcome, plan, None, StopReason::BudgetExhausted)
    });

    EpisodeTrace {
        task_id: task.id.clone(),
        decomposer: decomposer.name().to_string(),
        budget: opts.budget,
        iterations: lp.iterations,
        stop,
        final_outcome,
        final_plan,
        final_quality,
        buffer: lp.buffer,
    }
}
