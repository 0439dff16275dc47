//! Static checks of a plan against the operator registry and the names
//! available in the task environment.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Expr, Plan};
use crate::registry::{ArgKind, Lookup, Param, Registry};
use crate::value::ValueKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiagnosticCode {
    UnknownOp,
    UnboundVariable,
    ArityMismatch,
    TypeMismatch,
    UnimplementedOp,
    DuplicateTarget,
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub step_index: usize,
    pub code: DiagnosticCode,
    pub message: String,
}

/// Environment variable names with their kinds, where known.
pub type EnvTypes = BTreeMap<String, Option<ValueKind>>;

struct Checker<'a> {
    out: Vec<Diagnostic>,
    step: usize,
    target: &'a str,
}

impl Checker<'_> {
    fn error(&mut self, code: DiagnosticCode, message: String) {
        self.out.push(Diagnostic {
            severity: Severity::Error,
            step_index: self.step,
            code,
            message: format!("step {} (`{}`): {message}", self.step, self.target),
        });
    }
}

/// Every identifier and placeholder inside an expression.
fn names(e: &Expr, out: &mut Vec<(bool, String)>) {
    match e {
        Expr::Ident(n) => out.push((false, n.clone())),
        Expr::Placeholder(n) => out.push((true, n.clone())),
        Expr::List(items) => items.iter().for_each(|i| names(i, out)),
        Expr::Number(_) | Expr::Str(_) => {}
    }
}

fn literal_ok(p: &Param, e: &Expr, scope: &EnvTypes) -> Result<(), String> {
    let kind = p.kind;
    let want = kind.describe();
    match e {
        Expr::Ident(n) => match scope.get(n).copied().flatten() {
            Some(k) if !kind.accepts(k) => Err(format!("`{n}` is a {k}, expected {want}")),
            _ => Ok(()),
        },
        Expr::Placeholder(_) => Ok(()),
        Expr::Number(x) => match kind {
            ArgKind::Scalar | ArgKind::SeriesOrScalar => Ok(()),
            ArgKind::Int if *x >= 0.0 && x.fract() == 0.0 => Ok(()),
            ArgKind::Int => Err(format!("expected a non-negative integer, got {x}")),
            _ => Err(format!("expected {want}, got the number {x}")),
        },
        Expr::Str(s) => match kind {
            ArgKind::Text | ArgKind::TextList => {
                if !p.choices.is_empty() && !p.choices.contains(&s.as_str()) {
                    Err(format!("\"{s}\" is not one of {}", p.choices.join(", ")))
                } else {
                    Ok(())
                }
            }
            _ => Err(format!("expected {want}, got the string \"{s}\"")),
        },
        Expr::List(items) => match kind {
            ArgKind::TextList => {
                for item in items {
                    match item {
                        Expr::Str(_) | Expr::Placeholder(_) => {}
                        Expr::Ident(n) => match scope.get(n).copied().flatten() {
                            Some(k) if k != ValueKind::Text => {
                                return Err(format!("list item `{n}` is a {k}, expected string"))
                            }
                            _ => {}
                        },
                        _ => return Err("expected a list of strings".into()),
                    }
                }
                Ok(())
            }
            _ => Err(format!("expected {want}, got a list")),
        },
    }
}

/// Diagnostics for `plan`; empty means it may be executed. `contract` is the
/// kind the task expects as the result; a mismatch is reported as a warning.
pub fn validate_plan(
    plan: &Plan,
    env: &EnvTypes,
    registry: &Registry,
    contract: Option<ValueKind>,
) -> Vec<Diagnostic> {
    use DiagnosticCode::*;
    let mut scope = env.clone();
    let mut out = Vec::new();
    let mut result_kind = None;
    let result_index = plan.result_index();
    for (i, step) in plan.steps.iter().enumerate() {
        let mut c = Checker {
            out: std::mem::take(&mut out),
            step: i,
            target: &step.target,
        };
        if scope.contains_key(&step.target) {
            let what = if env.contains_key(&step.target) {
                "an environment variable"
            } else {
                "an earlier step"
            };
            c.error(
                DuplicateTarget,
                format!(
                    "`{}` is already defined by {what}; choose a new name",
                    step.target
                ),
            );
        }

        let mut refs = Vec::new();
        step.args.values().for_each(|e| names(e, &mut refs));
        for (placeholder, n) in refs {
            if placeholder {
                c.error(
                    UnboundVariable,
                    format!("placeholder `{{{n}}}` was left in the plan; replace it with a variable name or a literal value"),
                );
            } else if !scope.contains_key(&n) {
                c.error(
                    UnboundVariable,
                    format!("`{n}` is not defined before this step"),
                );
            }
        }

        let mut kind = None;
        match registry.lookup(&step.op) {
            Lookup::Unknown => c.error(UnknownOp, format!("unknown operator `{}`", step.op)),
            Lookup::Unimplemented(u) => c.error(
                UnimplementedOp,
                format!("operator `{}` is not available here; {}", step.op, u.hint),
            ),
            Lookup::Op { def, .. } => {
                let canon = registry.canonical_step(step);
                for name in canon.args.keys() {
                    if def.param(name).is_none() {
                        let expected: Vec<&str> = def.params.iter().map(|p| p.name).collect();
                        c.error(
                            ArityMismatch,
                            format!(
                                "{} has no argument `{name}`; arguments are {}",
                                step.op,
                                expected.join(", ")
                            ),
                        );
                    }
                }
                for p in def.params {
                    match canon.args.get(p.name) {
                        None if p.required => c.error(
                            ArityMismatch,
                            format!(
                                "{} is missing required argument `{}` ({})",
                                step.op,
                                p.name,
                                p.kind.describe()
                            ),
                        ),
                        None => {}
                        Some(e) => {
                            if let Err(m) = literal_ok(p, e, &scope) {
                                c.error(TypeMismatch, format!("argument `{}`: {m}", p.name));
                            }
                        }
                    }
                }
                kind = def.output.infer(&canon.args);
            }
        }
        out = c.out;
        scope.insert(step.target.clone(), kind);
        if Some(i) == result_index {
            result_kind = kind;
        }
    }
    if let (Some(want), Some(got), Some(i)) = (contract, result_kind, result_index) {
        if want != got {
            out.push(Diagnostic {
                severity: Severity::Warning,
                step_index: i,
                code: TypeMismatch,
                message: format!(
                    "step {i} (`{}`): result is a {got} but the task expects a {want}",
                    plan.steps[i].target
                ),
            });
        }
    }
    out
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}
