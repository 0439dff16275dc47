//! Straight-line operator programs: `TARGET = OP(name=expr, ...)` per line.

mod parser;
mod validate;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub use parser::{parse_plan, SyntaxError};
pub use validate::{has_errors, validate_plan, Diagnostic, DiagnosticCode, EnvTypes, Severity};

/// Variable name treated as the program result when present.
pub const FINAL_RESULT: &str = "FINAL_RESULT";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "expr", content = "value", rename_all = "snake_case")]
pub enum Expr {
    Ident(String),
    Number(f64),
    Str(String),
    List(Vec<Expr>),
    /// `{NAME}` left unfilled from a prompt template.
    Placeholder(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Step {
    pub target: String,
    pub op: String,
    pub args: BTreeMap<String, Expr>,
    /// 1-based source line, 0 for constructed steps. Not part of equality.
    #[serde(default)]
    pub line: usize,
}

impl PartialEq for Step {
    fn eq(&self, other: &Self) -> bool {
        self.target == other.target && self.op == other.op && self.args == other.args
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub steps: Vec<Step>,
}

impl Plan {
    /// Index of the result step: the last `FINAL_RESULT` assignment, else the
    /// last step.
    pub fn result_index(&self) -> Option<usize> {
        self.steps
            .iter()
            .rposition(|s| s.target == FINAL_RESULT)
            .or_else(|| self.steps.len().checked_sub(1))
    }
}

fn write_expr(out: &mut String, e: &Expr) {
    match e {
        Expr::Ident(s) => out.push_str(s),
        Expr::Number(x) => {
            let _ = write!(out, "{x}");
        }
        Expr::Str(s) => {
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    '\r' => out.push_str("\\r"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
        Expr::List(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, item);
            }
            out.push(']');
        }
        Expr::Placeholder(name) => {
            let _ = write!(out, "{{{name}}}");
        }
    }
}

/// Canonical text: one statement per line, keyword arguments sorted by name,
/// numbers in shortest round-trip form.
pub fn serialize_plan(plan: &Plan) -> String {
    let mut out = String::new();
    for step in &plan.steps {
        let _ = write!(out, "{} = {}(", step.target, step.op);
        for (i, (name, expr)) in step.args.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(name);
            out.push('=');
            write_expr(&mut out, expr);
        }
        out.push_str(")\n");
    }
    out
}
