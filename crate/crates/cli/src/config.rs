//! Configuration file (TOML or JSON) for `gen` and `run`. Command-line
//! flags override file values.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tsr_core::benchgen::BenchConfig;
use tsr_core::decomposer::LlmConfig;
use tsr_core::retrieval::RetrievalConfig;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum DecomposerKind {
    #[default]
    Scripted,
    Llm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: Option<PathBuf>,
    pub decomposer: DecomposerKind,
    pub budget: usize,
    /// Overrides each task's own backtest threshold.
    pub tau: Option<f64>,
    pub parallelism: usize,
    pub report: PathBuf,
    pub traces: PathBuf,
    /// Where to write each task's final answer, if anywhere.
    pub answers: Option<PathBuf>,
    /// Ask the scripted decomposer to leave out the projection step.
    pub no_project: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            decomposer: DecomposerKind::Scripted,
            budget: tsr_core::executor::DEFAULT_BUDGET,
            tau: None,
            parallelism: 1,
            report: PathBuf::from("report.json"),
            traces: PathBuf::from("traces"),
            answers: None,
            no_project: false,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.budget < 1 {
            return Err(CliError::Usage("budget must be at least 1".into()));
        }
        if self.parallelism < 1 {
            return Err(CliError::Usage("parallelism must be at least 1".into()));
        }
        if let Some(tau) = self.tau {
            if !(tau.is_finite() && tau >= 0.0) {
                return Err(CliError::Usage(format!("tau must be a non-negative number, got {tau}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub gen: BenchConfig,
    pub run: RunConfig,
    pub llm: LlmConfig,
    pub retrieval: RetrievalConfig,
}

impl FileConfig {
    /// `.json` files are read as JSON, anything else as TOML.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        parsed.map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
    }

    pub fn load_or_default(path: Option<&Path>) -> Result<Self, CliError> {
        path.map_or_else(|| Ok(Self::default()), Self::load)
    }
}
