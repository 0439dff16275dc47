//! Operator catalog: canonical operators with their signatures, plus an alias
//! table accepting the CamelCase `...OP` names that prompts and language
//! models use.

mod args;
mod ops;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::OnceLock;

use crate::error::OpResult;
use crate::plan::{Expr, Plan, Step};
use crate::retrieval::RetrievalClient;
use crate::value::{Value, ValueKind};

pub use args::{ArgValue, Args};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ArgKind {
    Series,
    /// Frame; a series is promoted to one column.
    Frame,
    Scalar,
    /// Non-negative whole number.
    Int,
    Text,
    TextList,
    Matrix,
    Model,
    /// Number, or a series whose last value is used.
    SeriesOrScalar,
}

impl ArgKind {
    pub fn describe(self) -> &'static str {
        match self {
            ArgKind::Series => "series",
            ArgKind::Frame => "frame",
            ArgKind::Scalar => "number",
            ArgKind::Int => "int",
            ArgKind::Text => "string",
            ArgKind::TextList => "list of strings",
            ArgKind::Matrix => "matrix",
            ArgKind::Model => "model",
            ArgKind::SeriesOrScalar => "number|series",
        }
    }

    /// Whether a bound variable of kind `k` can be passed here.
    pub fn accepts(self, k: ValueKind) -> bool {
        use ValueKind as V;
        match self {
            ArgKind::Series => k == V::Series,
            ArgKind::Frame => matches!(k, V::Frame | V::Series),
            ArgKind::Scalar | ArgKind::Int => k == V::Scalar,
            ArgKind::Text | ArgKind::TextList => k == V::Text,
            ArgKind::Matrix => k == V::Matrix,
            ArgKind::Model => k == V::ModelHandle,
            ArgKind::SeriesOrScalar => matches!(k, V::Series | V::Scalar),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Param {
    pub name: &'static str,
    pub kind: ArgKind,
    pub required: bool,
    /// Allowed literal values for string parameters; empty means free text.
    pub choices: &'static [&'static str],
}

const fn req(name: &'static str, kind: ArgKind) -> Param {
    Param {
        name,
        kind,
        required: true,
        choices: &[],
    }
}

const fn opt(name: &'static str, kind: ArgKind) -> Param {
    Param {
        name,
        kind,
        required: false,
        choices: &[],
    }
}

const fn choice(name: &'static str, required: bool, choices: &'static [&'static str]) -> Param {
    Param {
        name,
        kind: ArgKind::Text,
        required,
        choices,
    }
}

/// Static result kind of an operator, possibly depending on literal args.
#[derive(Clone, Copy)]
pub enum Output {
    Fixed(ValueKind),
    Dynamic {
        describe: &'static str,
        infer: fn(&BTreeMap<String, Expr>) -> Option<ValueKind>,
    },
}

impl Output {
    pub fn infer(&self, args: &BTreeMap<String, Expr>) -> Option<ValueKind> {
        match self {
            Output::Fixed(k) => Some(*k),
            Output::Dynamic { infer, .. } => infer(args),
        }
    }

    pub fn describe(&self) -> String {
        match self {
            Output::Fixed(k) => k.to_string(),
            Output::Dynamic { describe, .. } => (*describe).to_string(),
        }
    }
}

/// Services an operator may need beyond its arguments.
#[derive(Clone, Copy, Default)]
pub struct ExecCtx<'a> {
    pub retrieval: Option<&'a RetrievalClient>,
}

pub type OpFn = fn(&Args, &ExecCtx) -> OpResult<Value>;

pub struct OpDef {
    pub name: &'static str,
    pub summary: &'static str,
    pub params: &'static [Param],
    pub output: Output,
    pub run: OpFn,
    /// Produces a forecast whose backend can be scored by backtest.
    pub forecast: bool,
}

impl OpDef {
    pub fn param(&self, name: &str) -> Option<&Param> {
        self.params.iter().find(|p| p.name == name)
    }

    pub fn signature(&self) -> String {
        let mut s = format!("{}(", self.name);
        for (i, p) in self.params.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            let _ = write!(s, "{}: {}", p.name, p.kind.describe());
            if !p.choices.is_empty() {
                let _ = write!(s, " in {{{}}}", p.choices.join(", "));
            }
            if !p.required {
                s.push_str(" = optional");
            }
        }
        let _ = write!(s, ") -> {}", self.output.describe());
        s
    }
}

pub struct Alias {
    pub name: &'static str,
    pub target: &'static str,
    /// String arguments filled in when the caller omits them.
    pub preset: &'static [(&'static str, &'static str)],
}

pub struct Unimplemented {
    pub name: &'static str,
    pub hint: &'static str,
}

pub enum Lookup<'a> {
    Op {
        def: &'a OpDef,
        preset: &'a [(&'static str, &'static str)],
    },
    Unimplemented(&'a Unimplemented),
    Unknown,
}

pub struct Registry {
    ops: Vec<OpDef>,
    aliases: Vec<Alias>,
    unimplemented: Vec<Unimplemented>,
}

impl Registry {
    /// The process-wide standard catalog.
    pub fn standard() -> &'static Registry {
        static REG: OnceLock<Registry> = OnceLock::new();
        REG.get_or_init(|| Registry {
            ops: ops::catalog(),
            aliases: ops::aliases(),
            unimplemented: ops::unimplemented(),
        })
    }

    pub fn ops(&self) -> &[OpDef] {
        &self.ops
    }

    pub fn aliases(&self) -> &[Alias] {
        &self.aliases
    }

    pub fn unimplemented(&self) -> &[Unimplemented] {
        &self.unimplemented
    }

    pub fn op(&self, name: &str) -> Option<&OpDef> {
        self.ops.iter().find(|d| d.name == name)
    }

    pub fn lookup(&self, name: &str) -> Lookup<'_> {
        if let Some(def) = self.op(name) {
            return Lookup::Op { def, preset: &[] };
        }
        if let Some(a) = self.aliases.iter().find(|a| a.name == name) {
            let def = self.op(a.target).expect("alias targets a catalog operator");
            return Lookup::Op {
                def,
                preset: a.preset,
            };
        }
        if let Some(u) = self.unimplemented.iter().find(|u| u.name == name) {
            return Lookup::Unimplemented(u);
        }
        Lookup::Unknown
    }

    /// Step rewritten to its canonical operator with alias presets filled in.
    /// Unknown and unimplemented operators are returned unchanged.
    pub fn canonical_step(&self, step: &Step) -> Step {
        match self.lookup(&step.op) {
            Lookup::Op { def, preset } => {
                let mut args = step.args.clone();
                for (k, v) in preset {
                    args.entry((*k).to_string())
                        .or_insert_with(|| Expr::Str((*v).to_string()));
                }
                Step {
                    target: step.target.clone(),
                    op: def.name.to_string(),
                    args,
                    line: step.line,
                }
            }
            _ => step.clone(),
        }
    }

    pub fn canonical_plan(&self, plan: &Plan) -> Plan {
        Plan {
            steps: plan.steps.iter().map(|s| self.canonical_step(s)).collect(),
        }
    }

    /// Operator definitions as shown to a decomposer: one line per operator
    /// followed by its accepted aliases, then the unavailable names.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for def in &self.ops {
            let _ = writeln!(out, "- {}", def.signature());
            let _ = writeln!(out, "    {}", def.summary);
            let names: Vec<String> = self
                .aliases
                .iter()
                .filter(|a| a.target == def.name)
                .map(|a| {
                    if a.preset.is_empty() {
                        a.name.to_string()
                    } else {
                        let p: Vec<String> = a
                            .preset
                            .iter()
                            .map(|(k, v)| format!("{k}=\"{v}\""))
                            .collect();
                        format!("{} ({})", a.name, p.join(", "))
                    }
                })
                .collect();
            if !names.is_empty() {
                let _ = writeln!(out, "    aliases: {}", names.join(", "));
            }
        }
        if !self.unimplemented.is_empty() {
            let names: Vec<&str> = self.unimplemented.iter().map(|u| u.name).collect();
            let _ = writeln!(out, "Not available: {}", names.join(", "));
        }
        out
    }
}
