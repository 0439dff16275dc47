//! Plan execution and the propose/execute/feedback episode loop.

mod episode;
pub mod feedback;

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};

use serde::{Deserialize, Serialize};

use crate::metrics::Quality;
use crate::models::ModelName;
use crate::plan::{Expr, Plan};
use crate::registry::{ArgValue, Args, ExecCtx, Lookup, Registry};
use crate::task::{TaskInstance, TaskKind};
use crate::value::Value;

pub use episode::{run_episode, BufferEntry, EpisodeOptions, EpisodeTrace, Iteration, StopReason, DEFAULT_BUDGET};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecError {
    /// Failing step; `None` when the plan text could not be parsed.
    pub step_index: Option<usize>,
    pub op: String,
    pub code: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ExecOutcome {
    Success {
        result: Value,
        /// Values bound by the plan's own steps. Not serialized.
        #[serde(skip)]
        bindings: BTreeMap<String, Value>,
    },
    Failure {
        error: ExecError,
    },
}

impl ExecOutcome {
    pub fn is_success(&self) -> bool {
        matches!(self, ExecOutcome::Success { .. })
    }

    pub fn result(&self) -> Option<&Value> {
        match self {
            ExecOutcome::Success { result, .. } => Some(result),
            ExecOutcome::Failure { .. } => None,
        }
    }

    pub fn error(&self) -> Option<&ExecError> {
        match self {
            ExecOutcome::Failure { error } => Some(error),
            ExecOutcome::Success { .. } => None,
        }
    }

    pub fn summary(&self) -> OutcomeSummary {
        match self {
            ExecOutcome::Success { result, .. } => OutcomeSummary::Success {
                result: result.summary(),
            },
            ExecOutcome::Failure { error } => OutcomeSummary::Failure {
                error: error.clone(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum OutcomeSummary {
    Success { result: String },
    Failure { error: ExecError },
}

/// A step as it was run: canonical operator name and resolved arguments.
#[derive(Debug, Clone)]
pub struct ExecutedStep {
    pub index: usize,
    pub op: String,
    pub args: Args,
    pub forecast: bool,
}

#[derive(Debug, Clone)]
pub struct Execution {
    pub outcome: ExecOutcome,
    pub steps: Vec<ExecutedStep>,
}

fn resolve(e: &Expr, scope: &BTreeMap<String, Value>) -> Result<ArgValue, String> {
    match e {
        Expr::Ident(n) => scope
            .get(n)
            .cloned()
            .map(ArgValue::Value)
            .ok_or_else(|| format!("`{n}` is not defined")),
        Expr::Number(x) => Ok(ArgValue::Value(Value::Scalar(*x))),
        Expr::Str(s) => Ok(ArgValue::Value(Value::Text(s.clone()))),
        Expr::List(items) => items
            .iter()
            .map(|i| resolve(i, scope))
            .collect::<Result<_, _>>()
            .map(ArgValue::List),
        Expr::Placeholder(n) => Err(format!("placeholder `{{{n}}}` has no value")),
    }
}

fn panic_message(p: &(dyn std::any::Any + Send)) -> String {
    p.downcast_ref::<&str>()
        .map(|s| s.to_string())
        .or_else(|| p.downcast_ref::<String>().cloned())
        .unwrap_or_else(|| "operator panicked".into())
}

/// Run the steps of `plan` in order over `env`. Operator errors, and panics
/// inside operators, become a `Failure` naming the step.
pub fn execute_plan(
    plan: &Plan,
    env: &BTreeMap<String, Value>,
    registry: &Registry,
    ctx: &ExecCtx,
) -> Execution {
    let mut scope = env.clone();
    let mut bindings = BTreeMap::new();
    let mut steps = Vec::with_capacity(plan.steps.len());
    let fail = |steps, index: usize, op: &str, code: &str, message: String| Execution {
        outcome: ExecOutcome::Failure {
            error: ExecError {
                step_index: Some(index),
                op: op.to_string(),
                code: code.to_string(),
                message,
            },
        },
        steps,
    };
    let Some(result_index) = plan.result_index() else {
        return Execution {
            outcome: ExecOutcome::Failure {
                error: ExecError {
                    step_index: None,
                    op: String::new(),
                    code: "NoResult".into(),
                    message: "the plan has no steps".into(),
                },
            },
            steps,
        };
    };
    for (i, step) in plan.steps.iter().enumerate() {
        let at = format!("step {i} (`{}`)", step.target);
        let (def, canon) = match registry.lookup(&step.op) {
            Lookup::Op { def, .. } => (def, registry.canonical_step(step)),
            Lookup::Unimplemented(u) => {
                let msg = format!("{at}: operator `{}` is not available here; {}", step.op, u.hint);
                return fail(steps, i, &step.op, "UnimplementedOp", msg);
            }
            Lookup::Unknown => {
                let msg = format!("{at}: unknown operator `{}`", step.op);
                return fail(steps, i, &step.op, "UnknownOp", msg);
            }
        };
        if scope.contains_key(&step.target) {
            let msg = format!("{at}: `{}` is already defined", step.target);
            return fail(steps, i, &step.op, "DuplicateTarget", msg);
        }
        let mut args = Args::default();
        for (name, e) in &canon.args {
            match resolve(e, &scope) {
                Ok(v) => args.insert(name.clone(), v),
                Err(m) => return fail(steps, i, &step.op, "UnboundVariable", format!("{at}: {m}")),
            }
        }
        let run = def.run;
        let value = match catch_unwind(AssertUnwindSafe(|| run(&args, ctx))) {
            Ok(Ok(v)) => v,
            Ok(Err(e)) => {
                let msg = format!("{at}: {} failed: {e}", def.name);
                return fail(steps, i, &step.op, e.code(), msg);
            }
            Err(p) => {
                let msg = format!("{at}: {} failed: {}", def.name, panic_message(p.as_ref()));
                return fail(steps, i, &step.op, "InternalError", msg);
            }
        };
        steps.push(ExecutedStep {
            index: i,
            op: def.name.to_string(),
            args,
            forecast: def.forecast,
        });
        scope.insert(step.target.clone(), value.clone());
        bindings.insert(step.target.clone(), value);
    }
    let result = bindings[&plan.steps[result_index].target].clone();
    Execution {
        outcome: ExecOutcome::Success { result, bindings },
        steps,
    }
}

/// Model label of a forecast step, with the operator's default filled in.
pub fn forecast_model(step: &ExecutedStep) -> String {
    if step.args.get("fitted").is_some() {
        return "fitted_ar".into();
    }
    match step.args.opt_text("model") {
        Ok(Some(m)) => m.to_string(),
        _ if step.op == "forecast_multi" => ModelName::LaggedRegression.as_str().into(),
        _ => ModelName::HoltWinters.as_str().into(),
    }
}

const BACKTEST_KEYS: &[&str] = &[
    "data", "covariates", "model", "period", "ar_order", "alpha", "beta", "gamma", "ridge",
];

/// Backtest MAPE of a forecast step's model on the task history, holding out
/// the last `horizon` points. `None` for non-forecast steps, non-predictive
/// tasks, fitted-model forecasts, and when the backtest itself fails.
pub fn intermediate_quality(step: &ExecutedStep, task: &TaskInstance) -> Option<Quality> {
    if !step.forecast || task.kind != TaskKind::Predictive || step.args.get("fitted").is_some() {
        return None;
    }
    let horizon = task.horizon?;
    let mut args = Args::default();
    for key in BACKTEST_KEYS {
        if let Some(v) = step.args.get(key) {
            args.insert(*key, v.clone());
        }
    }
    if args.get("model").is_none() {
        args.insert("model", ArgValue::Value(Value::Text(forecast_model(step))));
    }
    args.insert("future_length", ArgValue::Value(Value::Scalar(horizon as f64)));
    let def = Registry::standard().op("backtest")?;
    match catch_unwind(AssertUnwindSafe(|| (def.run)(&args, &ExecCtx::default()))) {
        Ok(Ok(Value::Scalar(m))) if m.is_finite() => Some(Quality::mape(m)),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::parse_plan;
    use crate::series::TimeSeries;

    fn env_of(pairs: &[(&str, Vec<f64>)]) -> BTreeMap<String, Value> {
        pairs
            .iter()
            .map(|(n, v)| {
                (
                    n.to_string(),
                    Value::Series(TimeSeries::from_values(*n, v.clone()).unwrap()),
                )
            })
            .collect()
    }

    fn run(text: &str, env: &BTreeMap<String, Value>) -> Execution {
        execute_plan(&parse_plan(text).unwrap(), env, Registry::standard(), &ExecCtx::default())
    }

    #[test]
    fn empty_plan_has_no_result() {
        let ex = run("", &BTreeMap::new());
        assert_eq!(ex.outcome.error().unwrap().code, "NoResult");
    }

    #[test]
    fn error_names_the_step() {
        let env = env_of(&[("VAL", vec![1.0, -2.0, 3.0])]);
        let ex = run("A = apply(data=VAL, fn=\"abs\")\nB = apply(data=VAL, fn=\"log\")", &env);
        let e = ex.outcome.error().unwrap();
        assert_eq!(e.step_index, Some(1));
        assert_eq!(e.code, "DomainError");
        assert!(e.message.starts_with("step 1 (`B`)"), "{}", e.message);
        assert_eq!(ex.steps.len(), 1);
    }

    #[test]
    fn final_result_wins_over_last_step() {
        let env = env_of(&[("VAL", vec![1.0, 2.0, 3.0])]);
        let ex = run(
            "FINAL_RESULT = apply(data=VAL, fn=\"abs\")\nX = apply(data=VAL, fn=\"zscore\")",
            &env,
        );
        assert_eq!(ex.outcome.result(), env.get("VAL"));
    }
}
