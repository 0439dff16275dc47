//! On-disk dataset layout.
//!
//! ```text
//! <root>/manifest.json
//! <root>/<family dir>/<task id>/task.json   (+ one CSV per series or frame)
//! ```
//!
//! In `task.json`, series and frames are references `{"csv": "VAL.csv",
//! "as": "series"}` to sibling files; every other value is stored inline in
//! its tagged JSON form.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::constraint::ConstraintSpec;
use crate::io::{frame_to_csv, read_frame_csv, write_atomic, IoError};
use crate::series::Frame;
use crate::task::{Knowledge, OutputContract, TaskInstance, TaskKind};
use crate::value::Value;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{path}: {message}")]
    Invalid { path: String, message: String },
    #[error("dataset not found at {0}")]
    NotFound(String),
}

fn invalid(path: &Path, message: impl Into<String>) -> DatasetError {
    DatasetError::Invalid {
        path: path.display().to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CsvAs {
    Series,
    Frame,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueRef {
    Csv {
        csv: String,
        #[serde(rename = "as")]
        as_: CsvAs,
    },
    Inline(Value),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct TaskFile {
    id: String,
    family: String,
    kind: TaskKind,
    question: String,
    env: BTreeMap<String, ValueRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    constraint: Option<ConstraintSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    knowledge: Option<Knowledge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    horizon: Option<usize>,
    ground_truth: ValueRef,
    output_contract: OutputContract,
    quality_threshold: f64,
    seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub family: String,
    pub id: String,
    pub seed: u64,
    /// Task directory relative to the dataset root.
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub master_seed: u64,
    pub entries: Vec<ManifestEntry>,
}

/// Directory name used for a family label such as `predictive:max_load`.
pub fn family_dir(family: &str) -> String {
    family.replace(':', "_")
}

fn store(dir: &Path, name: &str, v: &Value) -> Result<ValueRef, DatasetError> {
    let frame_ref = |f: &Frame, as_| -> Result<ValueRef, DatasetError> {
        let file = format!("{name}.csv");
        write_atomic(&dir.join(&file), frame_to_csv(f).as_bytes())?;
        Ok(ValueRef::Csv { csv: file, as_ })
    };
    match v {
        Value::Series(s) => frame_ref(&Frame::from(s.clone()), CsvAs::Series),
        Value::Frame(f) => frame_ref(f, CsvAs::Frame),
        other => Ok(ValueRef::Inline(other.clone())),
    }
}

fn load(dir: &Path, r: ValueRef) -> Result<Value, DatasetError> {
    match r {
        ValueRef::Inline(v) => Ok(v),
        ValueRef::Csv { csv, as_ } => {
            if csv.contains("..") || Path::new(&csv).is_absolute() {
                return Err(invalid(dir, format!("csv reference `{csv}` leaves the task directory")));
            }
            let path = dir.join(&csv);
            let frame = read_frame_csv(&path)?;
            match as_ {
                CsvAs::Frame => Ok(Value::Frame(frame)),
                CsvAs::Series if frame.width() == 1 => Ok(Value::Series(frame.into_columns().remove(0))),
                CsvAs::Series => Err(invalid(&path, "expected a single value column")),
            }
        }
    }
}

/// Write `task.json` and its CSV files into `dir`.
pub fn save_task(dir: &Path, task: &TaskInstance) -> Result<(), DatasetError> {
    let mut env = BTreeMap::new();
    for (name, v) in &task.env {
        env.insert(name.clone(), store(dir, name, v)?);
    }
    let file = TaskFile {
        id: task.id.clone(),
        family: task.family.clone(),
        kind: task.kind,
        question: task.question.clone(),
        env,
        constraint: task.constraint,
        knowledge: task.knowledge.clone(),
        horizon: task.horizon,
        ground_truth: store(dir, "truth", &task.ground_truth)?,
        output_contract: task.output_contract,
        quality_threshold: task.quality_threshold,
        seed: task.seed,
    };
    let text = serde_json::to_string_pretty(&file).expect("task serializes");
    write_atomic(&dir.join("task.json"), text.as_bytes())?;
    Ok(())
}

pub fn load_task(dir: &Path) -> Result<TaskInstance, DatasetError> {
    let path = dir.join("task.json");
    let text = fs::read_to_string(&path).map_err(|e| invalid(&path, e.to_string()))?;
    let file: TaskFile = serde_json::from_str(&text).map_err(|e| invalid(&path, e.to_string()))?;
    let mut env = BTreeMap::new();
    for (name, r) in file.env {
        env.insert(name, load(dir, r)?);
    }
    Ok(TaskInstance {
        id: file.id,
        family: file.family,
        kind: file.kind,
        question: file.question,
        env,
        constraint: file.constraint,
        knowledge: file.knowledge,
        horizon: file.horizon,
        ground_truth: load(dir, file.ground_truth)?,
        output_contract: file.output_contract,
        quality_threshold: file.quality_threshold,
        seed: file.seed,
    })
}

/// Write every task plus `manifest.json`; returns the manifest.
pub fn save_dataset(root: &Path, master_seed: u64, tasks: &[TaskInstance]) -> Result<Manifest, DatasetError> {
    let mut entries = Vec::with_capacity(tasks.len());
    for t in tasks {
        let rel = format!("{}/{}", family_dir(&t.family), t.id);
        save_task(&root.join(&rel), t)?;
        entries.push(ManifestEntry {
            family: t.family.clone(),
            id: t.id.clone(),
            seed: t.seed,
            path: rel,
        });
    }
    let manifest = Manifest { master_seed, entries };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_atomic(&root.join("manifest.json"), text.as_bytes())?;
    Ok(manifest)
}

pub fn read_manifest(root: &Path) -> Result<Manifest, DatasetError> {
    let path = root.join("manifest.json");
    if !path.exists() {
        return Err(DatasetError::NotFound(root.display().to_string()));
    }
    let text = fs::read_to_string(&path).map_err(|e| invalid(&path, e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| invalid(&path, e.to_string()))
}

/// All tasks listed in the manifest, in manifest order.
pub fn load_dataset(root: &Path) -> Result<Vec<TaskInstance>, DatasetError> {
    read_manifest(root)?
        .entries
        .iter()
        .map(|e| load_task(&root.join(&e.path)))
        .collect()
}

pub fn task_dir(root: &Path, entry: &ManifestEntry) -> PathBuf {
    root.join(&entry.path)
}
