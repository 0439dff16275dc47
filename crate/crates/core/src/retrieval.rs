//! Weather and electricity-load retrieval with an on-disk cache.
//!
//! Every answered query is stored as `<cache_dir>/<key>.csv` plus a
//! `<key>.json` sidecar, where `key` is the SHA-256 of the canonical query
//! JSON (sorted keys, variables sorted and deduplicated). Offline mode also
//! consults `<cache_dir>/fixtures.json`, a list of longer fixture files that
//! queries may slice into.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::error::OpError;
use crate::http::{DenyNetwork, HttpResponse, Transport};
use crate::io::{format_timestamp, frame_to_csv, parse_timestamp, read_frame_csv, write_atomic};
use crate::series::{Frame, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceKind {
    Weather,
    Electricity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Resolution {
    Hourly,
    Daily,
}

impl Resolution {
    pub fn step_secs(self) -> i64 {
        match self {
            Resolution::Hourly => 3600,
            Resolution::Daily => 86_400,
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "hourly" => Some(Resolution::Hourly),
            "daily" => Some(Resolution::Daily),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    Point { lat: f64, lon: f64 },
    Zone(String),
}

/// Half-open time range `[start, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RetrievalQuery {
    pub kind: SourceKind,
    pub location: Location,
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
    pub variables: Vec<String>,
    pub resolution: Resolution,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RetrievalError {
    #[error("invalid query: {0}")]
    InvalidQuery(String),
    #[error("network disabled and no fixture for query {key}")]
    NetworkDisabledNoFixture { key: String },
    #[error("upstream returned status {status}: {body}")]
    UpstreamError { status: u16, body: String },
    #[error("no data for {from} .. {to}")]
    EmptyRange { from: String, to: String },
    #[error("unknown zone `{0}`")]
    UnknownZone(String),
    #[error("environment variable `{0}` holding the API key is not set")]
    AuthMissing(String),
    #[error("cache or fixture error: {0}")]
    Io(String),
    #[error("malformed upstream response: {0}")]
    Parse(String),
}

impl RetrievalError {
    pub fn code(&self) -> &'static str {
        match self {
            RetrievalError::InvalidQuery(_) => "InvalidQuery",
            RetrievalError::NetworkDisabledNoFixture { .. } => "NetworkDisabledNoFixture",
            RetrievalError::UpstreamError { .. } => "UpstreamError",
            RetrievalError::EmptyRange { .. } => "EmptyRange",
            RetrievalError::UnknownZone(_) => "UnknownZone",
            RetrievalError::AuthMissing(_) => "AuthMissing",
            RetrievalError::Io(_) => "RetrievalIo",
            RetrievalError::Parse(_) => "UpstreamParse",
        }
    }
}

impl From<RetrievalError> for OpError {
    fn from(e: RetrievalError) -> Self {
        OpError::Retrieval {
            code: e.code(),
            message: e.to_string(),
        }
    }
}

impl RetrievalQuery {
    pub fn validate(&self) -> Result<(), RetrievalError> {
        let bad = |m: String| Err(RetrievalError::InvalidQuery(m));
        if self.start >= self.end {
            return bad("start must be before end".into());
        }
        if self.variables.is_empty() || self.variables.iter().any(|v| v.trim().is_empty()) {
            return bad("variables must be non-empty".into());
        }
        match (&self.kind, &self.location) {
            (SourceKind::Weather, Location::Point { lat, lon }) => {
                if !(-90.0..=90.0).contains(lat) || !(-180.0..=180.0).contains(lon) {
                    return bad(format!("coordinates out of range: ({lat}, {lon})"));
                }
            }
            (SourceKind::Electricity, Location::Zone(z)) => {
                if z.trim().is_empty() {
                    return bad("zone code must be non-empty".into());
                }
            }
            (SourceKind::Weather, _) => {
                return bad("weather queries need latitude/longitude".into())
            }
            (SourceKind::Electricity, _) => {
                return bad("electricity queries need a zone code".into())
            }
        }
        if (self.end - self.start).num_seconds() % self.resolution.step_secs() != 0 {
            return bad("range is not a whole number of steps".into());
        }
        Ok(())
    }

    pub fn rows(&self) -> usize {
        ((self.end - self.start).num_seconds() / self.resolution.step_secs()) as usize
    }

    /// SHA-256 of the canonical JSON form; independent of variable order.
    pub fn cache_key(&self) -> String {
        let mut vars = self.variables.clone();
        vars.sort();
        vars.dedup();
        let canon = RetrievalQuery {
            variables: vars,
            ..self.clone()
        };
        // serde_json maps are sorted by key.
        let value = serde_json::to_value(&canon).expect("query serializes");
        let text = serde_json::to_string(&value).expect("value serializes");
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RetrievalMode {
    #[default]
    Offline,
    Live,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RetrievalConfig {
    pub mode: RetrievalMode,
    pub cache_dir: PathBuf,
    pub weather_url: String,
    pub electricity_url: String,
    /// Environment variable holding the electricity API key.
    pub electricity_key_env: String,
}

impl Default for RetrievalConfig {
    fn default() -> Self {
        Self {
            mode: RetrievalMode::Offline,
            cache_dir: PathBuf::from("cache"),
            weather_url: "https://archive-api.open-meteo.com/v1/archive".into(),
            electricity_url: "https://api.eia.gov/v2/electricity/rto/region-data/data/".into(),
            electricity_key_env: "EIA_API_KEY".into(),
        }
    }
}

/// One entry of `fixtures.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FixtureEntry {
    pub kind: SourceKind,
    pub location: Location,
    pub resolution: Resolution,
    /// CSV file relative to the cache directory.
    pub file: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Sidecar {
    query: RetrievalQuery,
    source: String,
}

pub struct RetrievalClient {
    config: RetrievalConfig,
    transport: Arc<dyn Transport>,
}

impl RetrievalClient {
    pub fn new(config: RetrievalConfig, transport: Arc<dyn Transport>) -> Self {
        Self { config, transport }
    }

    /// Offline client over `cache_dir` that can never reach the network.
    pub fn offline(cache_dir: impl Into<PathBuf>) -> Self {
        Self::new(
            RetrievalConfig {
                cache_dir: cache_dir.into(),
                ..RetrievalConfig::default()
            },
            Arc::new(DenyNetwork::default()),
        )
    }

    pub fn config(&self) -> &RetrievalConfig {
        &self.config
    }

    pub fn fetch_weather(&self, q: &RetrievalQuery) -> Result<Frame, RetrievalError> {
        if q.kind != SourceKind::Weather {
            return Err(RetrievalError::InvalidQuery(
                "expected a weather query".into(),
            ));
        }
        self.fetch(q)
    }

    pub fn fetch_electricity(&self, q: &RetrievalQuery) -> Result<Frame, RetrievalError> {
        if q.kind != SourceKind::Electricity {
            return Err(RetrievalError::InvalidQuery(
                "expected an electricity query".into(),
            ));
        }
        self.fetch(q)
    }

    fn fetch(&self, q: &RetrievalQuery) -> Result<Frame, RetrievalError> {
        q.validate()?;
        let key = q.cache_key();
        let csv_path = self.config.cache_dir.join(format!("{key}.csv"));
        if csv_path.exists() {
            let frame = read_frame_csv(&csv_path).map_err(|e| RetrievalError::Io(e.to_string()))?;
            return select_columns(&frame, &q.variables);
        }
        let (frame, source) = match self.config.mode {
            RetrievalMode::Offline => (self.fixture_frame(q, &key)?, "fixture"),
            RetrievalMode::Live => (self.upstream_frame(q)?, "live"),
        };
        self.store(&key, q, &frame, source)?;
        select_columns(&frame, &q.variables)
    }

    fn store(
        &self,
        key: &str,
        q: &RetrievalQuery,
        frame: &Frame,
        source: &str,
    ) -> Result<(), RetrievalError> {
        let dir = &self.config.cache_dir;
        let io = |e: crate::io::IoError| RetrievalError::Io(e.to_string());
        let sidecar = Sidecar {
            query: q.clone(),
            source: source.into(),
        };
        let meta = serde_json::to_string_pretty(&sidecar).expect("sidecar serializes");
        write_atomic(&dir.join(format!("{key}.json")), meta.as_bytes()).map_err(io)?;
        write_atomic(
            &dir.join(format!("{key}.csv")),
            frame_to_csv(frame).as_bytes(),
        )
        .map_err(io)
    }

    fn fixtures(&self) -> Result<Vec<FixtureEntry>, RetrievalError> {
        let path = self.config.cache_dir.join("fixtures.json");
        if !path.exists() {
            return Ok(Vec::new());
        }
        let text = fs::read_to_string(&path)
            .map_err(|e| RetrievalError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| RetrievalError::Io(format!("{}: {e}", path.display())))
    }

    fn fixture_frame(&self, q: &RetrievalQuery, key: &str) -> Result<Frame, RetrievalError> {
        let entries: Vec<FixtureEntry> = self
            .fixtures()?
            .into_iter()
            .filter(|e| e.kind == q.kind && e.resolution == q.resolution)
            .collect();
        let here: Vec<&FixtureEntry> = entries
            .iter()
            .filter(|e| same_location(&e.location, &q.location))
            .collect();
        if here.is_empty() {
            if let Location::Zone(z) = &q.location {
                return Err(RetrievalError::UnknownZone(z.clone()));
            }
            return Err(RetrievalError::NetworkDisabledNoFixture { key: key.into() });
        }
        let mut partial = None;
        for entry in here {
            let frame = read_frame_csv(&self.config.cache_dir.join(&entry.file))
                .map_err(|e| RetrievalError::Io(e.to_string()))?;
            if !q.variables.iter().all(|v| frame.column(v).is_some()) {
                continue;
            }
            match slice_range(&frame, q) {
                Ok(f) => return Ok(f),
                Err(e @ RetrievalError::EmptyRange { .. }) => partial = Some(e),
                Err(e) => return Err(e),
            }
        }
        Err(partial.unwrap_or(RetrievalError::NetworkDisabledNoFixture { key: key.into() }))
    }

    fn upstream_frame(&self, q: &RetrievalQuery) -> Result<Frame, RetrievalError> {
        let url = match q.kind {
            SourceKind::Weather => weather_url(&self.config.weather_url, q),
            SourceKind::Electricity => {
                let key = std::env::var(&self.config.electricity_key_env).map_err(|_| {
                    RetrievalError::AuthMissing(self.config.electricity_key_env.clone())
                })?;
                electricity_url(&self.config.electricity_url, q, &key)
            }
        };
        let resp = get_with_retry(self.transport.as_ref(), &url)?;
        if resp.status != 200 {
            return Err(RetrievalError::UpstreamError {
                status: resp.status,
                body: resp.body.chars().take(200).collect(),
            });
        }
        let frame = match q.kind {
            SourceKind::Weather => parse_weather_response(&resp.body, q)?,
            SourceKind::Electricity => parse_electricity_response(&resp.body, q)?,
        };
        slice_range(&frame, q)
    }
}

const RETRY_ATTEMPTS: u32 = 3;

fn get_with_retry(t: &dyn Transport, url: &str) -> Result<HttpResponse, RetrievalError> {
    let mut last = None;
    for attempt in 0..RETRY_ATTEMPTS {
        match t.get(url, &[]) {
            Ok(r) if r.status >= 500 => {
                last = Some(RetrievalError::UpstreamError {
                    status: r.status,
                    body: r.body,
                })
            }
            Ok(r) => return Ok(r),
            Err(crate::http::TransportError::Disabled) => {
                return Err(RetrievalError::NetworkDisabledNoFixture {
                    key: "live request refused".into(),
                })
            }
            Err(e) => {
                last = Some(RetrievalError::UpstreamError {
                    status: 0,
                    body: e.to_string(),
                })
            }
        }
        if attempt + 1 < RETRY_ATTEMPTS {
            std::thread::sleep(std::time::Duration::from_millis(200 << attempt));
        }
    }
    Err(last.expect("at least one attempt"))
}

fn same_location(a: &Location, b: &Location) -> bool {
    match (a, b) {
        (Location::Zone(x), Location::Zone(y)) => x.eq_ignore_ascii_case(y),
        (Location::Point { lat: a1, lon: o1 }, Location::Point { lat: a2, lon: o2 }) => {
            (a1 - a2).abs() < 1e-6 && (o1 - o2).abs() < 1e-6
        }
        _ => false,
    }
}

/// Rows of `frame` covering the query range exactly; any uncovered part is
/// an `EmptyRange` error (partial results are never returned).
fn slice_range(frame: &Frame, q: &RetrievalQuery) -> Result<Frame, RetrievalError> {
    let first = frame
        .columns()
        .first()
        .ok_or_else(|| RetrievalError::Parse("no columns".into()))?;
    if first.step_secs != q.resolution.step_secs() {
        return Err(RetrievalError::Io(format!(
            "data step {}s does not match requested resolution",
            first.step_secs
        )));
    }
    let data_end = first.next_timestamp();
    let empty = |from: NaiveDateTime, to: NaiveDateTime| RetrievalError::EmptyRange {
        from: format_timestamp(from),
        to: format_timestamp(to),
    };
    if q.start < first.start {
        return Err(empty(q.start, first.start.min(q.end)));
    }
    if q.end > data_end {
        return Err(empty(data_end.max(q.start), q.end));
    }
    let offset = (q.start - first.start).num_seconds();
    if offset % first.step_secs != 0 {
        return Err(RetrievalError::InvalidQuery(
            "start is not aligned to the data clock".into(),
        ));
    }
    let from = (offset / first.step_secs) as usize;
    frame
        .slice(from, from + q.rows())
        .map_err(|e| RetrievalError::Io(e.to_string()))
}

fn select_columns(frame: &Frame, vars: &[String]) -> Result<Frame, RetrievalError> {
    let mut cols = Vec::new();
    for v in vars {
        if cols.iter().any(|c: &TimeSeries| &c.name == v) {
            continue;
        }
        let c = frame
            .column(v)
            .ok_or_else(|| RetrievalError::Parse(format!("variable `{v}` missing from data")))?;
        cols.push(c.clone());
    }
    Frame::new(cols).map_err(|e| RetrievalError::Io(e.to_string()))
}

fn encode(s: &str) -> String {
    let mut out = String::new();
    for b in s.bytes() {
        match b {
            b'A'..=b'Z' | b'a'..=b'z' | b'0'..=b'9' | b'-' | b'_' | b'.' | b'~' | b',' => {
                out.push(b as char)
            }
            _ => out.push_str(&format!("%{b:02X}")),
        }
    }
    out
}

fn weather_url(base: &str, q: &RetrievalQuery) -> String {
    let Location::Point { lat, lon } = q.location else {
        unreachable!("validated weather query has a point location")
    };
    let last = q.end - Duration::seconds(1);
    let field = match q.resolution {
        Resolution::Hourly => "hourly",
        Resolution::Daily => "daily",
    };
    format!(
        "{base}?latitude={lat}&longitude={lon}&start_date={}&end_date={}&{field}={}&timezone=GMT",
        q.start.format("%Y-%m-%d"),
        last.format("%Y-%m-%d"),
        encode(&q.variables.join(",")),
    )
}

/// Load variable names mapped to the upstream series type codes.
const ELECTRICITY_TYPES: [(&str, &str); 4] = [
    ("load", "D"),
    ("load_forecast", "DF"),
    ("generation", "NG"),
    ("interchange", "TI"),
];

fn electricity_url(base: &str, q: &RetrievalQuery, key: &str) -> String {
    let Location::Zone(zone) = &q.location else {
        unreachable!("validated electricity query has a zone")
    };
    let mut url = format!(
        "{base}?api_key={}&frequency={}&{}={}&{}={}",
        encode(key),
        match q.resolution {
            Resolution::Hourly => "hourly",
            Resolution::Daily => "daily",
        },
        encode("data[0]"),
        "value",
        encode("facets[respondent][]"),
        encode(zone),
    );
    for v in &q.variables {
        if let Some((_, code)) = ELECTRICITY_TYPES.iter().find(|(n, _)| n == v) {
            url.push_str(&format!("&{}={code}", encode("facets[type][]")));
        }
    }
    url.push_str(&format!(
        "&start={}&end={}&{}=period&{}=asc",
        q.start.format("%Y-%m-%dT%H"),
        (q.end - Duration::seconds(1)).format("%Y-%m-%dT%H"),
        encode("sort[0][column]"),
        encode("sort[0][direction]"),
    ));
    url
}

fn json_err(e: serde_json::Error) -> RetrievalError {
    RetrievalError::Parse(e.to_string())
}

/// `{"hourly": {"time": [...], "<var>": [...]}}` (or `daily`).
pub fn parse_weather_response(body: &str, q: &RetrievalQuery) -> Result<Frame, RetrievalError> {
    let v: serde_json::Value = serde_json::from_str(body).map_err(json_err)?;
    let block_name = match q.resolution {
        Resolution::Hourly => "hourly",
        Resolution::Daily => "daily",
    };
    let block = v
        .get(block_name)
        .ok_or_else(|| RetrievalError::Parse(format!("missing `{block_name}` block")))?;
    let times: Vec<NaiveDateTime> = block
        .get("time")
        .and_then(|t| t.as_array())
        .ok_or_else(|| RetrievalError::Parse("missing `time` array".into()))?
        .iter()
        .map(|t| t.as_str().and_then(parse_timestamp))
        .collect::<Option<_>>()
        .ok_or_else(|| RetrievalError::Parse("bad timestamp".into()))?;
    let start = *times.first().ok_or(RetrievalError::EmptyRange {
        from: format_timestamp(q.start),
        to: format_timestamp(q.end),
    })?;
    let mut cols = Vec::new();
    for var in &q.variables {
        let values: Vec<f64> = block
            .get(var)
            .and_then(|a| a.as_array())
            .ok_or_else(|| RetrievalError::Parse(format!("missing variable `{var}`")))?
            .iter()
            .map(|x| x.as_f64())
            .collect::<Option<_>>()
            .ok_or_else(|| {
                RetrievalError::Parse(format!("null or non-numeric value in `{var}`"))
            })?;
        if values.len() != times.len() {
            return Err(RetrievalError::Parse(format!(
                "`{var}` length differs from `time`"
            )));
        }
        cols.push(
            TimeSeries::new(var.clone(), start, q.resolution.step_secs(), values)
                .map_err(|e| RetrievalError::Parse(e.to_string()))?,
        );
    }
    Frame::new(cols).map_err(|e| RetrievalError::Parse(e.to_string()))
}

/// `{"response": {"data": [{"period": "...", "type": "D", "value": 1.0}, ...]}}`.
pub fn parse_electricity_response(body: &str, q: &RetrievalQuery) -> Result<Frame, RetrievalError> {
    let v: serde_json::Value = serde_json::from_str(body).map_err(json_err)?;
    let rows = v
        .pointer("/response/data")
        .and_then(|d| d.as_array())
        .ok_or_else(|| RetrievalError::Parse("missing response.data".into()))?;
    let step = q.resolution.step_secs();
    let mut cols = Vec::new();
    for var in &q.variables {
        let code = ELECTRICITY_TYPES
            .iter()
            .find(|(n, _)| n == var)
            .map(|(_, c)| *c)
            .ok_or_else(|| {
                RetrievalError::InvalidQuery(format!("unknown electricity variable `{var}`"))
            })?;
        let mut values = vec![None; q.rows()];
        for r in rows
            .iter()
            .filter(|r| r.get("type").and_then(|t| t.as_str()) == Some(code))
        {
            let period = r
                .get("period")
                .and_then(|p| p.as_str())
                .and_then(|p| parse_timestamp(p).or_else(|| parse_timestamp(&format!("{p}:00"))))
                .ok_or_else(|| RetrievalError::Parse("bad period".into()))?;
            let value = match r.get("value") {
                Some(serde_json::Value::String(s)) => s.parse::<f64>().ok(),
                Some(x) => x.as_f64(),
                None => None,
            }
            .ok_or_else(|| RetrievalError::Parse("bad value".into()))?;
            let off = (period - q.start).num_seconds();
            if off >= 0 && off % step == 0 && ((off / step) as usize) < values.len() {
                values[(off / step) as usize] = Some(value);
            }
        }
        if let Some(i) = values.iter().position(Option::is_none) {
            let from = q.start + Duration::seconds(step * i as i64);
            return Err(RetrievalError::EmptyRange {
                from: format_timestamp(from),
                to: format_timestamp(q.end),
            });
        }
        let values: Vec<f64> = values.into_iter().flatten().collect();
        cols.push(
            TimeSeries::new(var.clone(), q.start, step, values)
                .map_err(|e| RetrievalError::Parse(e.to_string()))?,
        );
    }
    Frame::new(cols).map_err(|e| RetrievalError::Parse(e.to_string()))
}

/// Write a fixture CSV and register it in `fixtures.json`.
pub fn add_fixture(
    cache_dir: &Path,
    entry: FixtureEntry,
    frame: &Frame,
) -> Result<(), RetrievalError> {
    let io = |e: crate::io::IoError| RetrievalError::Io(e.to_string());
    write_atomic(&cache_dir.join(&entry.file), frame_to_csv(frame).as_bytes()).map_err(io)?;
    let index = cache_dir.join("fixtures.json");
    let mut entries: Vec<FixtureEntry> = if index.exists() {
        let text = fs::read_to_string(&index).map_err(|e| RetrievalError::Io(e.to_string()))?;
        serde_json::from_str(&text).map_err(|e| RetrievalError::Io(e.to_string()))?
    } else {
        Vec::new()
    };
    entries.retain(|e| e.file != entry.file);
    entries.push(entry);
    let text = serde_json::to_string_pretty(&entries).expect("fixtures serialize");
    write_atomic(&index, text.as_bytes()).map_err(io)
}
