//! `tsr`: generate benchmark tasks, run the agent over them, score answers.
//!
//! Exit codes: 0 on normal completion, 2 on usage errors (bad flags, bad
//! config, unknown family, invalid plan file), 3 on environment errors
//! (missing dataset, unwritable output, unreachable endpoint).

mod answers;
mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::DecomposerKind;
use tsr_core::decomposer::LlmMode;
use tsr_core::retrieval::RetrievalMode;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Env(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Env(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Env(m) => write!(f, "error: {m}"),
        }
    }
}

pub fn env_err(e: impl std::fmt::Display) -> CliError {
    CliError::Env(e.to_string())
}

#[derive(Parser)]
#[command(name = "tsr", version, about = "Time-series task agent: benchmark generation, runs and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args, Debug, Default)]
pub struct GenArgs {
    /// Master seed; every task seed derives from it.
    #[arg(long)]
    seed: Option<u64>,
    /// Family or family group to generate (repeatable), e.g. `predictive:max_load` or `anomaly`.
    #[arg(long = "family")]
    families: Vec<String>,
    /// Instances per family.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value = "dataset")]
    out: PathBuf,
    /// TOML or JSON config; its `[gen]` section is used.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(clap::Args, Debug, Default)]
pub struct RunArgs {
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    decomposer: Option<DecomposerKind>,
    #[arg(long)]
    budget: Option<usize>,
    /// Backtest MAPE threshold for accepting a forecast plan.
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    parallelism: Option<usize>,
    #[arg(long)]
    report: Option<PathBuf>,
    #[arg(long)]
    traces: Option<PathBuf>,
    /// Also write each final answer as `<dir>/<task_id>/answer.json`.
    #[arg(long)]
    answers: Option<PathBuf>,
    /// Scripted decomposer leaves out the constraint projection step.
    #[arg(long)]
    no_project: bool,
    #[arg(long, value_enum)]
    llm_mode: Option<LlmModeArg>,
    #[arg(long)]
    fixtures: Option<PathBuf>,
    #[arg(long)]
    base_url: Option<String>,
    #[arg(long)]
    model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long)]
    api_key_env: Option<String>,
    #[arg(long, value_enum)]
    retrieval_mode: Option<RetrievalModeArg>,
    #[arg(long)]
    cache_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum LlmModeArg {
    Replay,
    Record,
    Live,
}

impl From<LlmModeArg> for LlmMode {
    fn from(m: LlmModeArg) -> Self {
        match m {
            LlmModeArg::Replay => LlmMode::Replay,
            LlmModeArg::Record => LlmMode::Record,
            LlmModeArg::Live => LlmMode::Live,
        }
    }
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
pub enum RetrievalModeArg {
    Offline,
    Live,
}

impl From<RetrievalModeArg> for RetrievalMode {
    fn from(m: RetrievalModeArg) -> Self {
        match m {
            RetrievalModeArg::Offline => RetrievalMode::Offline,
            RetrievalModeArg::Live => RetrievalMode::Live,
        }
    }
}

#[derive(clap::Args, Debug)]
pub struct EvalArgs {
    /// Directory holding `<task_id>/answer.(csv|json)`.
    #[arg(long)]
    outputs: PathBuf,
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct PlanArgs {
    /// Plan file to parse and validate.
    file: PathBuf,
    /// Task directory whose environment the plan runs against.
    #[arg(long)]
    task: Option<PathBuf>,
    /// Environment variable `NAME` or `NAME=kind` (repeatable).
    #[arg(long = "var")]
    vars: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic benchmark dataset.
    Gen(GenArgs),
    /// Run the agent over a dataset and write a report plus per-task traces.
    Run(Box<RunArgs>),
    /// Score answers produced elsewhere against a dataset.
    Eval(EvalArgs),
    /// Parse and validate a plan file.
    Plan(PlanArgs),
    /// Print the operator registry.
    Ops,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => commands::gen(&a),
        Command::Run(a) => commands::run(&a),
        Command::Eval(a) => commands::eval(&a),
        Command::Plan(a) => commands::plan(&a),
        Command::Ops => {
            print!("{}", tsr_core::registry::Registry::standard().render());
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
