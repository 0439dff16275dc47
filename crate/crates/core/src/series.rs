//! Timestamped series, column-aligned frames and dense matrices.

use chrono::{Duration, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{OpError, OpResult};

/// Epoch used when data arrives without timestamps.
pub fn default_start() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2024, 1, 1)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid literal date")
}

/// A regularly sampled univariate series.
///
/// Invariants: at least one value, strictly positive step, every value finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub name: String,
    pub start: NaiveDateTime,
    /// Sampling interval in seconds.
    pub step_secs: i64,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(
        name: impl Into<String>,
        start: NaiveDateTime,
        step_secs: i64,
        values: Vec<f64>,
    ) -> OpResult<Self> {
        if values.is_empty() {
            return Err(OpError::SeriesTooShort { need: 1, got: 0 });
        }
        if step_secs <= 0 {
            return Err(OpError::InvalidArgument(format!(
                "step must be positive, got {step_secs}s"
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(OpError::DomainError(format!(
                "non-finite value at index {i}"
            )));
        }
        Ok(Self {
            name: name.into(),
            start,
            step_secs,
            values,
        })
    }

    /// Hourly series starting at the default epoch.
    pub fn from_values(name: impl Into<String>, values: Vec<f64>) -> OpResult<Self> {
        Self::new(name, default_start(), 3600, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn step(&self) -> Duration {
        Duration::seconds(self.step_secs)
    }

    pub fn timestamp(&self, i: usize) -> NaiveDateTime {
        self.start + Duration::seconds(self.step_secs * i as i64)
    }

    /// Timestamp one step past the last observation.
    pub fn next_timestamp(&self) -> NaiveDateTime {
        self.timestamp(self.len())
    }

    /// Same name and clock, different values. The new start is shifted by
    /// `offset` steps.
    pub fn with_values(&self, offset: i64, values: Vec<f64>) -> OpResult<Self> {
        Self::new(
            self.name.clone(),
            self.start + Duration::seconds(self.step_secs * offset),
            self.step_secs,
            values,
        )
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Half-open slice `[from, to)` as a new series.
    pub fn slice(&self, from: usize, to: usize) -> OpResult<Self> {
        if from >= to || to > self.len() {
            return Err(OpError::InvalidArgument(format!(
                "slice {from}..{to} out of range for length {}",
                self.len()
            )));
        }
        self.with_values(from as i64, self.values[from..to].to_vec())
    }
}

/// Column-aligned multivariate table sharing one time index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    columns: Vec<TimeSeries>,
}

impl Frame {
    pub fn new(columns: Vec<TimeSeries>) -> OpResult<Self> {
        if let Some(first) = columns.first() {
            for c in &columns[1..] {
                if c.len() != first.len() {
                    return Err(OpError::LengthMismatch {
                        left: first.len(),
                        right: c.len(),
                    });
                }
            }
        }
        for (i, c) in columns.iter().enumerate() {
            if columns[..i].iter().any(|o| o.name == c.name) {
                return Err(OpError::DuplicateColumn(c.name.clone()));
            }
        }
        Ok(Self { columns })
    }

    pub fn columns(&self) -> &[TimeSeries] {
        &self.columns
    }

    pub fn into_columns(self) -> Vec<TimeSeries> {
        self.columns
    }

    pub fn width(&self) -> usize {
        self.columns.len()
    }

    /// Number of rows (0 for a frame without columns).
    pub fn len(&self) -> usize {
        self.columns.first().map_or(0, TimeSeries::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, name: &str) -> Option<&TimeSeries> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn names(&self) -> Vec<&str> {
        self.columns.iter().map(|c| c.name.as_str()).collect()
    }

    /// Shared timestamps, taken from the first column.
    pub fn index(&self) -> Vec<NaiveDateTime> {
        match self.columns.first() {
            Some(c) => (0..c.len()).map(|i| c.timestamp(i)).collect(),
            None => Vec::new(),
        }
    }

    pub fn slice(&self, from: usize, to: usize) -> OpResult<Self> {
        let cols = self
            .columns
            .iter()
            .map(|c| c.slice(from, to))
            .collect::<OpResult<Vec<_>>>()?;
        Frame::new(cols)
    }
}

/// Dense row-major real matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> OpResult<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(OpError::ShapeMismatch("ragged matrix rows".into()));
        }
        Ok(Self {
            rows: n,
            cols: m,
            data: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data
            .chunks(self.cols.max(1))
            .map(<[f64]>::to_vec)
            .collect()
    }

    pub fn is_binary(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    /// Count of off-diagonal entries equal to one.
    pub fn off_diagonal_ones(&self) -> usize {
        let mut n = 0;
        for r in 0..self.rows {
            for c in 0..self.cols {
                if r != c && self.get(r, c) == 1.0 {
                    n += 1;
                }
            }
        }
        n
    }
}
