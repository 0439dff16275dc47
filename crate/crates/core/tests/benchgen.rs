//! Benchmark generation: persistence, determinism and sampling failures.

use tsr_core::benchgen::{
    generate, make_predictive_task, BenchConfig, GenError, PredictiveConfig, PredictiveRequest, PredictiveVariant,
};
use tsr_core::constraint::{check, ConstraintKind};
use tsr_core::dataset::{load_dataset, read_manifest, save_dataset};
use tsr_core::{TaskKind, Value, ValueKind};

fn small(seed: u64) -> BenchConfig {
    BenchConfig {
        master_seed: seed,
        predictive_per_kind: 2,
        anomaly_per_variant: 2,
        causal_count: 2,
        ..BenchConfig::default()
    }
}

#[test]
fn dataset_round_trips_through_disk() {
    let tasks = generate(&small(3)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let manifest = save_dataset(dir.path(), 3, &tasks).unwrap();
    assert_eq!(manifest.entries.len(), tasks.len());
    assert_eq!(read_manifest(dir.path()).unwrap(), manifest);
    let back = load_dataset(dir.path()).unwrap();
    assert_eq!(back, tasks);
}

#[test]
fn same_seed_same_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    save_dataset(a.path(), 9, &generate(&small(9)).unwrap()).unwrap();
    save_dataset(b.path(), 9, &generate(&small(9)).unwrap()).unwrap();
    let manifest = |d: &std::path::Path| std::fs::read(d.join("manifest.json")).unwrap();
    assert_eq!(manifest(a.path()), manifest(b.path()));
    for e in read_manifest(a.path()).unwrap().entries {
        let task = |d: &std::path::Path| std::fs::read(d.join(&e.path).join("task.json")).unwrap();
        assert_eq!(task(a.path()), task(b.path()), "{}", e.id);
    }
    assert_ne!(generate(&small(9)).unwrap(), generate(&small(10)).unwrap());
}

#[test]
fn every_task_is_well_formed() {
    for t in generate(&small(21)).unwrap() {
        assert_eq!(t.ground_truth.kind(), t.output_contract.kind, "{}", t.id);
        match t.kind {
            TaskKind::Predictive => {
                let spec = t.constraint.as_ref().unwrap();
                let Value::Series(truth) = &t.ground_truth else { panic!() };
                let Some(Value::Series(hist)) = t.env.get("VAL") else { panic!() };
                assert_eq!(truth.start, hist.next_timestamp(), "{}", t.id);
                assert!(!check(truth.values(), spec).unwrap().is_empty(), "{}", t.id);
                assert!(t.question.contains(&format!("next {} hours", truth.len())), "{}", t.id);
            }
            TaskKind::DiagnosticAnomaly => {
                let Value::BinVec(labels) = &t.ground_truth else { panic!() };
                assert!(labels.contains(&1) && labels.contains(&0), "{}", t.id);
                assert!(t.env.contains_key("NORM_VAL") || t.env.contains_key("ANOMALY_RATE"));
            }
            TaskKind::DiagnosticCausal => {
                let Value::Matrix(m) = &t.ground_truth else { panic!() };
                let d = t.output_contract.dim.unwrap();
                assert!((3..=6).contains(&d));
                assert_eq!((m.rows(), m.cols()), (d, d));
                assert!(m.is_binary());
                assert_eq!(t.env["VAL"].kind(), ValueKind::Frame);
            }
        }
    }
}

#[test]
fn impossible_configuration_reports_infeasible_sample() {
    let cfg = PredictiveConfig {
        horizon_range: (1, 1),
        ..PredictiveConfig::default()
    };
    let err = make_predictive_task(&PredictiveRequest {
        id: "t".into(),
        family: "predictive:variability".into(),
        seed: 1,
        kind: ConstraintKind::Variability,
        variant: PredictiveVariant::Plain,
        zone: 0,
        cfg: &cfg,
    })
    .unwrap_err();
    assert!(matches!(err, GenError::InfeasibleSample { attempts, .. } if attempts > 0), "{err}");
}
