//! Reading and writing `<task_id>/answer.(json|csv)` files.
//!
//! `answer.json` holds either a tagged value as written by `run`, or a bare
//! array (1-D for series and labels, 2-D for a relation matrix).
//! `answer.csv` holds one row per time step (or matrix row); an optional
//! header line and a leading timestamp column are ignored.

use std::fs;
use std::path::Path;

use serde_json::Value as Json;
use tsr_core::io::parse_timestamp;
use tsr_core::task::TaskInstance;
use tsr_core::{Matrix, TimeSeries, Value, ValueKind};

#[derive(Debug)]
pub enum AnswerError {
    Missing,
    Malformed(String),
}

fn malformed(msg: impl Into<String>) -> AnswerError {
    AnswerError::Malformed(msg.into())
}

/// Series aligned with the task's truth when it has one.
fn to_series(task: &TaskInstance, values: Vec<f64>) -> Result<Value, AnswerError> {
    let s = match &task.ground_truth {
        Value::Series(truth) => truth.with_values(0, values),
        _ => TimeSeries::from_values("answer", values),
    };
    s.map(Value::Series).map_err(|e| malformed(e.to_string()))
}

fn to_labels(values: &[f64]) -> Result<Value, AnswerError> {
    values
        .iter()
        .map(|&v| match v {
            0.0 => Ok(0u8),
            1.0 => Ok(1u8),
            other => Err(malformed(format!("label {other} is not 0 or 1"))),
        })
        .collect::<Result<Vec<u8>, _>>()
        .map(Value::BinVec)
}

fn from_rows(task: &TaskInstance, rows: Vec<Vec<f64>>) -> Result<Value, AnswerError> {
    match task.output_contract.kind {
        ValueKind::Matrix => Matrix::from_rows(&rows)
            .map(Value::Matrix)
            .map_err(|e| malformed(e.to_string())),
        kind => {
            if rows.iter().any(|r| r.len() != 1) {
                return Err(malformed(format!("a {kind} answer needs exactly one value per row")));
            }
            let values: Vec<f64> = rows.into_iter().map(|r| r[0]).collect();
            match kind {
                ValueKind::BinVec => to_labels(&values),
                _ => to_series(task, values),
            }
        }
    }
}

fn numbers(items: &[Json]) -> Option<Vec<f64>> {
    items.iter().map(Json::as_f64).collect()
}

fn parse_json(task: &TaskInstance, text: &str) -> Result<Value, AnswerError> {
    let json: Json = serde_json::from_str(text).map_err(|e| malformed(e.to_string()))?;
    if json.is_object() {
        return serde_json::from_value(json).map_err(|e| malformed(e.to_string()));
    }
    let Json::Array(items) = json else {
        return Err(malformed("expected an array or a tagged value"));
    };
    if let Some(values) = numbers(&items) {
        return from_rows(task, values.into_iter().map(|v| vec![v]).collect());
    }
    let rows = items
        .iter()
        .map(|r| r.as_array().and_then(|a| numbers(a)))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| malformed("array entries must be numbers or arrays of numbers"))?;
    if task.output_contract.kind == ValueKind::Matrix {
        from_rows(task, rows)
    } else {
        Err(malformed("a 2-D array answers only relation tasks"))
    }
}

fn parse_csv(task: &TaskInstance, text: &str) -> Result<Value, AnswerError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() > 1 && parse_timestamp(fields[0]).is_some() {
            fields.remove(0);
        }
        let parsed: Result<Vec<f64>, _> = fields.iter().map(|f| f.parse::<f64>()).collect();
        match parsed {
            Ok(r) => rows.push(r),
            Err(_) if rows.is_empty() && i == 0 => continue,
            Err(_) => return Err(malformed(format!("line {}: not numeric", i + 1))),
        }
    }
    if rows.is_empty() {
        return Err(malformed("no rows"));
    }
    from_rows(task, rows)
}

pub fn read_answer(dir: &Path, task: &TaskInstance) -> Result<Value, AnswerError> {
    let json = dir.join("answer.json");
    let csv = dir.join("answer.csv");
    if json.is_file() {
        let text = fs::read_to_string(&json).map_err(|e| malformed(e.to_string()))?;
        parse_json(task, &text)
    } else if csv.is_file() {
        let text = fs::read_to_string(&csv).map_err(|e| malformed(e.to_string()))?;
        parse_csv(task, &text)
    } else {
        Err(AnswerError::Missing)
    }
}

pub fn write_answer(dir: &Path, value: &Value) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(value).expect("values serialize");
    fs::write(dir.join("answer.json"), text)
}
