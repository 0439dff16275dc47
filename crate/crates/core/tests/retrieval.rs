//! Data retrieval: offline fixtures, the on-disk cache, upstream parsing
//! through an in-process transport, and the fetch operators.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use chrono::NaiveDateTime;
use serde_json::json;
use tsr_core::executor::{execute_plan, ExecOutcome};
use tsr_core::http::{DenyNetwork, Headers, HttpResponse, Transport, TransportError};
use tsr_core::io::parse_timestamp;
use tsr_core::plan::parse_plan;
use tsr_core::registry::{ExecCtx, Registry};
use tsr_core::retrieval::{
    add_fixture, FixtureEntry, Location, Resolution, RetrievalClient, RetrievalConfig, RetrievalError,
    RetrievalMode, RetrievalQuery, SourceKind,
};
use tsr_core::{Frame, TimeSeries, Value};

fn ts(s: &str) -> NaiveDateTime {
    parse_timestamp(s).unwrap()
}

fn weather_query(start: &str, end: &str, vars: &[&str]) -> RetrievalQuery {
    RetrievalQuery {
        kind: SourceKind::Weather,
        location: Location::Point { lat: 52.52, lon: 13.41 },
        start: ts(start),
        end: ts(end),
        variables: vars.iter().map(|v| v.to_string()).collect(),
        resolution: Resolution::Hourly,
    }
}

/// 72 hours from 2024-01-01 with temperature and humidity columns.
fn seed_fixture(dir: &std::path::Path) {
    let start = ts("2024-01-01 00:00:00");
    let temp: Vec<f64> = (0..72).map(|i| i as f64 * 0.5).collect();
    let hum: Vec<f64> = (0..72).map(|i| 80.0 - i as f64 * 0.25).collect();
    let frame = Frame::new(vec![
        TimeSeries::new("temperature_2m", start, 3600, temp).unwrap(),
        TimeSeries::new("relative_humidity_2m", start, 3600, hum).unwrap(),
    ])
    .unwrap();
    let entry = FixtureEntry {
        kind: SourceKind::Weather,
        location: Location::Point { lat: 52.52, lon: 13.41 },
        resolution: Resolution::Hourly,
        file: "berlin.csv".into(),
    };
    add_fixture(dir, entry, &frame).unwrap();
}

#[test]
fn offline_slices_fixture_and_caches() {
    let dir = tempfile::tempdir().unwrap();
    seed_fixture(dir.path());
    let client = RetrievalClient::offline(dir.path());
    let q = weather_query("2024-01-01 12:00:00", "2024-01-02 00:00:00", &["temperature_2m"]);
    let f = client.fetch_weather(&q).unwrap();
    assert_eq!(f.len(), 12);
    assert_eq!(f.names(), ["temperature_2m"]);
    assert_eq!(f.columns()[0].values()[0], 6.0);
    assert_eq!(f.columns()[0].start, ts("2024-01-01 12:00:00"));

    let key = q.cache_key();
    assert!(dir.path().join(format!("{key}.csv")).exists());
    let sidecar = std::fs::read_to_string(dir.path().join(format!("{key}.json"))).unwrap();
    assert!(sidecar.contains("\"fixture\""));

    std::fs::remove_file(dir.path().join("berlin.csv")).unwrap();
    assert_eq!(client.fetch_weather(&q).unwrap(), f);
}

#[test]
fn cache_key_ignores_variable_order() {
    let a = weather_query("2024-01-01 00:00:00", "2024-01-02 00:00:00", &["a", "b"]);
    let b = weather_query("2024-01-01 00:00:00", "2024-01-02 00:00:00", &["b", "a", "a"]);
    let c = weather_query("2024-01-01 00:00:00", "2024-01-02 01:00:00", &["a", "b"]);
    assert_eq!(a.cache_key(), b.cache_key());
    assert_ne!(a.cache_key(), c.cache_key());
}

#[test]
fn offline_errors() {
    let dir = tempfile::tempdir().unwrap();
    seed_fixture(dir.path());
    let client = RetrievalClient::offline(dir.path());

    let outside = weather_query("2024-01-03 12:00:00", "2024-01-04 06:00:00", &["temperature_2m"]);
    assert!(matches!(client.fetch_weather(&outside), Err(RetrievalError::EmptyRange { .. })));

    let mut elsewhere = weather_query("2024-01-01 00:00:00", "2024-01-02 00:00:00", &["temperature_2m"]);
    elsewhere.location = Location::Point { lat: 0.0, lon: 0.0 };
    assert!(matches!(
        client.fetch_weather(&elsewhere),
        Err(RetrievalError::NetworkDisabledNoFixture { .. })
    ));

    let backwards = weather_query("2024-01-02 00:00:00", "2024-01-01 00:00:00", &["temperature_2m"]);
    assert!(matches!(client.fetch_weather(&backwards), Err(RetrievalError::InvalidQuery(_))));

    let zone = RetrievalQuery {
        kind: SourceKind::Electricity,
        location: Location::Zone("NOPE".into()),
        ..weather_query("2024-01-01 00:00:00", "2024-01-02 00:00:00", &["load"])
    };
    assert_eq!(client.fetch_electricity(&zone), Err(RetrievalError::UnknownZone("NOPE".into())));
    assert!(matches!(client.fetch_weather(&zone), Err(RetrievalError::InvalidQuery(_))));
}

struct Upstream {
    body: String,
    urls: Mutex<Vec<String>>,
    calls: AtomicUsize,
}

impl Transport for Upstream {
    fn get(&self, url: &str, _headers: &Headers) -> Result<HttpResponse, TransportError> {
        let n = self.calls.fetch_add(1, Ordering::SeqCst);
        self.urls.lock().unwrap().push(url.to_string());
        if n == 0 {
            return Ok(HttpResponse { status: 502, body: "bad gateway".into() });
        }
        Ok(HttpResponse { status: 200, body: self.body.clone() })
    }

    fn post_json(&self, _: &str, _: &Headers, _: &str) -> Result<HttpResponse, TransportError> {
        Err(TransportError::Connect("POST not expected".into()))
    }
}

#[test]
fn live_weather_parses_retries_and_caches() {
    let dir = tempfile::tempdir().unwrap();
    let times: Vec<String> = (0..24).map(|h| format!("2024-01-01T{h:02}:00")).collect();
    let temps: Vec<f64> = (0..24).map(|h| h as f64).collect();
    let upstream = Arc::new(Upstream {
        body: json!({"hourly": {"time": times, "temperature_2m": temps}}).to_string(),
        urls: Mutex::new(Vec::new()),
        calls: AtomicUsize::new(0),
    });
    let cfg = RetrievalConfig {
        mode: RetrievalMode::Live,
        cache_dir: dir.path().to_path_buf(),
        ..RetrievalConfig::default()
    };
    let client = RetrievalClient::new(cfg.clone(), upstream.clone());
    let q = weather_query("2024-01-01 06:00:00", "2024-01-01 18:00:00", &["temperature_2m"]);
    let f = client.fetch_weather(&q).unwrap();
    assert_eq!(f.columns()[0].values(), &temps[6..18]);
    assert_eq!(upstream.calls.load(Ordering::SeqCst), 2);
    let url = upstream.urls.lock().unwrap()[0].clone();
    assert!(url.contains("latitude=52.52") && url.contains("start_date=2024-01-01"), "{url}");

    // Served from the cache, even by a client that cannot reach the network.
    let cached = RetrievalClient::new(cfg, Arc::new(DenyNetwork::default()));
    assert_eq!(cached.fetch_weather(&q).unwrap(), f);
    assert_eq!(upstream.calls.load(Ordering::SeqCst), 2);
}

#[test]
fn electricity_response_parsing() {
    let q = RetrievalQuery {
        kind: SourceKind::Electricity,
        location: Location::Zone("ERCO".into()),
        start: ts("2024-03-01 00:00:00"),
        end: ts("2024-03-01 03:00:00"),
        variables: vec!["load".into()],
        resolution: Resolution::Hourly,
    };
    let body = json!({"response": {"data": [
        {"period": "2024-03-01T02", "type": "D", "value": "300"},
        {"period": "2024-03-01T00", "type": "D", "value": 100},
        {"period": "2024-03-01T01", "type": "D", "value": 200.5},
        {"period": "2024-03-01T01", "type": "DF", "value": 9},
    ]}})
    .to_string();
    let f = tsr_core::retrieval::parse_electricity_response(&body, &q).unwrap();
    assert_eq!(f.columns()[0].values(), &[100.0, 200.5, 300.0]);

    let gap = json!({"response": {"data": [{"period": "2024-03-01T00", "type": "D", "value": 1}]}}).to_string();
    assert!(matches!(
        tsr_core::retrieval::parse_electricity_response(&gap, &q),
        Err(RetrievalError::EmptyRange { .. })
    ));
}

#[test]
fn fetch_operator_runs_inside_a_plan() {
    let dir = tempfile::tempdir().unwrap();
    seed_fixture(dir.path());
    let client = RetrievalClient::offline(dir.path());
    let plan = parse_plan(
        "W = fetch_weather(latitude=52.52, longitude=13.41, start=\"2024-01-01 00:00:00\", \
         end=\"2024-01-02 00:00:00\", variables=[\"temperature_2m\", \"relative_humidity_2m\"])",
    )
    .unwrap();
    let env = BTreeMap::new();
    let ctx = ExecCtx { retrieval: Some(&client) };
    match execute_plan(&plan, &env, Registry::standard(), &ctx).outcome {
        ExecOutcome::Success { result: Value::Frame(f), .. } => {
            assert_eq!((f.len(), f.width()), (24, 2));
        }
        other => panic!("{other:?}"),
    }

    let missing = execute_plan(&plan, &env, Registry::standard(), &ExecCtx::default());
    assert_eq!(missing.outcome.error().unwrap().code, "RetrievalUnavailable");
}
