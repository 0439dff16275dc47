//! CSV files for series and frames, and atomic file writes.
//!
//! Layout: header row, first column `timestamp` (ISO-8601, no zone), the
//! remaining columns numeric.

use std::fs;
use std::io::Write;
use std::path::Path;

use chrono::NaiveDateTime;
use thiserror::Error;

use crate::series::{Frame, TimeSeries};

pub const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";
/// Step assumed for a single-row file.
const DEFAULT_STEP_SECS: i64 = 3600;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Format { path: String, message: String },
}

impl IoError {
    fn format(path: &Path, message: impl Into<String>) -> Self {
        IoError::Format {
            path: path.display().to_string(),
            message: message.into(),
        }
    }

    fn fs(path: &Path, source: std::io::Error) -> Self {
        IoError::Fs {
            path: path.display().to_string(),
            source,
        }
    }
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    NaiveDateTime::parse_from_str(s, TIMESTAMP_FORMAT)
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M"))
        .or_else(|_| NaiveDateTime::parse_from_str(s, "%Y-%m-%d %H:%M:%S"))
        .or_else(|_| {
            chrono::NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .map(|d| d.and_time(chrono::NaiveTime::MIN))
        })
        .ok()
}

pub fn format_timestamp(t: NaiveDateTime) -> String {
    t.format(TIMESTAMP_FORMAT).to_string()
}

/// Parse CSV text into a frame. `origin` only labels error messages.
pub fn frame_from_csv(text: &str, origin: &Path) -> Result<Frame, IoError> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| IoError::format(origin, e.to_string()))?
        .clone();
    if headers.get(0) != Some("timestamp") {
        return Err(IoError::format(origin, "first column must be `timestamp`"));
    }
    let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut stamps = Vec::new();
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (row, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| IoError::format(origin, e.to_string()))?;
        let line = row + 2;
        if rec.len() != names.len() + 1 {
            return Err(IoError::format(
                origin,
                format!("line {line}: expected {} fields", names.len() + 1),
            ));
        }
        let t = parse_timestamp(&rec[0]).ok_or_else(|| {
            IoError::format(origin, format!("line {line}: bad timestamp `{}`", &rec[0]))
        })?;
        stamps.push(t);
        for (j, col) in cols.iter_mut().enumerate() {
            let v: f64 = rec[j + 1].parse().map_err(|_| {
                IoError::format(origin, format!("line {line}: bad number `{}`", &rec[j + 1]))
            })?;
            col.push(v);
        }
    }
    if stamps.is_empty() {
        return Err(IoError::format(origin, "no data rows"));
    }
    let step = if stamps.len() > 1 {
        (stamps[1] - stamps[0]).num_seconds()
    } else {
        DEFAULT_STEP_SECS
    };
    if step <= 0 {
        return Err(IoError::format(origin, "timestamps must increase"));
    }
    for (i, w) in stamps.windows(2).enumerate() {
        if (w[1] - w[0]).num_seconds() != step {
            return Err(IoError::format(
                origin,
                format!("irregular timestamp at line {}", i + 3),
            ));
        }
    }
    let columns = names
        .into_iter()
        .zip(cols)
        .map(|(n, v)| TimeSeries::new(n, stamps[0], step, v))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| IoError::format(origin, e.to_string()))?;
    Frame::new(columns).map_err(|e| IoError::format(origin, e.to_string()))
}

pub fn read_frame_csv(path: &Path) -> Result<Frame, IoError> {
    let text = fs::read_to_string(path).map_err(|e| IoError::fs(path, e))?;
    frame_from_csv(&text, path)
}

/// Single-column CSV as a series.
pub fn read_series_csv(path: &Path) -> Result<TimeSeries, IoError> {
    let frame = read_frame_csv(path)?;
    if frame.width() != 1 {
        return Err(IoError::format(
            path,
            format!("expected 1 value column, found {}", frame.width()),
        ));
    }
    Ok(frame.into_columns().remove(0))
}

/// Numbers are written in shortest round-trip form.
pub fn frame_to_csv(frame: &Frame) -> String {
    let mut out = String::from("timestamp");
    for name in frame.names() {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    for (i, t) in frame.index().into_iter().enumerate() {
        out.push_str(&format_timestamp(t));
        for c in frame.columns() {
            out.push(',');
            out.push_str(&c.values()[i].to_string());
        }
        out.push('\n');
    }
    out
}

/// Write through a temporary file in the same directory, then rename.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), IoError> {
    let dir = path
        .parent()
        .filter(|d| !d.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(|e| IoError::fs(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| IoError::fs(dir, e))?;
    tmp.write_all(contents).map_err(|e| IoError::fs(path, e))?;
    tmp.persist(path).map_err(|e| IoError::fs(path, e.error))?;
    Ok(())
}
