//! Feedback-loop scenarios on a fixed load series, rendered as text and
//! compared with the stored snapshots in `crates/core/tests/snapshots`.
//!
//! Set `UPDATE_SNAPSHOTS=1` to rewrite the snapshot files.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::PathBuf;

use tsr_core::constraint::{ConstraintKind, ConstraintSpec};
use tsr_core::decomposer::{Fault, ScriptedDecomposer};
use tsr_core::executor::{run_episode, EpisodeOptions, EpisodeTrace};
use tsr_core::rng::{gaussian_vec, seeded};
use tsr_core::task::{OutputContract, TaskInstance, TaskKind};
use tsr_core::{TimeSeries, Value, ValueKind};

const HORIZON: usize = 24;

/// Daily cycle on a slow trend with seeded noise.
pub fn load_task() -> TaskInstance {
    let n = 240 + HORIZON;
    let noise = gaussian_vec(&mut seeded(3), n, 15.0);
    let y: Vec<f64> = (0..n)
        .map(|t| 1000.0 + 0.2 * t as f64 + 150.0 * (2.0 * PI * t as f64 / 24.0).sin() + noise[t])
        .collect();
    let hist = TimeSeries::from_values("load", y[..240].to_vec()).unwrap();
    let truth = hist.with_values(240, y[240..].to_vec()).unwrap();
    TaskInstance {
        id: "scenario".into(),
        family: "predictive:max_load".into(),
        kind: TaskKind::Predictive,
        question: "I have historical load data for the past 240 hours. I need to ensure that the maximum \
                   allowable system load does not exceed 1180.0000 MW. Please give me a forecast for the next \
                   24 hours for load."
            .into(),
        env: BTreeMap::from([("VAL".to_string(), Value::Series(hist))]),
        constraint: Some(ConstraintSpec::new(ConstraintKind::MaxLoad, 1180.0)),
        knowledge: None,
        horizon: Some(HORIZON),
        ground_truth: Value::Series(truth),
        output_contract: OutputContract {
            kind: ValueKind::Series,
            length: Some(HORIZON),
            dim: None,
        },
        quality_threshold: 0.1,
        seed: 0,
    }
}

/// Stable text form of a trace: plans, outcomes and the feedback sent.
pub fn render(trace: &EpisodeTrace) -> String {
    let mut out = String::new();
    for it in &trace.iterations {
        let _ = writeln!(out, "--- iteration {}{}", it.index, if it.duplicate { " (duplicate)" } else { "" });
        out.push_str(it.plan.as_deref().unwrap_or(&it.proposal));
        if let Some(o) = &it.outcome {
            let _ = writeln!(out, "outcome: {}", serde_json::to_string(o).unwrap());
        }
        if let Some(q) = it.quality {
            let _ = writeln!(out, "quality: {} {:.4}", q.metric.name(), q.value);
        }
        if let Some(fb) = &it.feedback_sent {
            let _ = writeln!(out, "feedback: {fb}");
        }
    }
    let _ = writeln!(out, "=== stop: {:?}", trace.stop);
    let _ = writeln!(out, "final: {}", serde_json::to_string(&trace.final_outcome.summary()).unwrap());
    if let Some(p) = &trace.final_plan {
        out.push_str(p);
    }
    out
}

fn snapshot_path(name: &str) -> PathBuf {
    // Resolves the same way from the core and cli crates.
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/snapshots")
        .join(format!("{name}.txt"))
}

/// Compare the rendered trace with its snapshot; `Err` describes a mismatch.
pub fn check_snapshot(name: &str, trace: &EpisodeTrace) -> Result<(), String> {
    let actual = render(trace);
    let path = snapshot_path(name);
    if std::env::var_os("UPDATE_SNAPSHOTS").is_some() {
        std::fs::write(&path, &actual).map_err(|e| e.to_string())?;
        return Ok(());
    }
    let expected = std::fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    if actual == expected {
        Ok(())
    } else {
        Err(format!("trace differs from {}:\n{actual}", path.display()))
    }
}

/// (a) First draft calls an unimplemented operator; the repair follows.
pub fn repair_trace() -> EpisodeTrace {
    let dec = ScriptedDecomposer {
        fault: Some(Fault::UnimplementedFirst),
        ..Default::default()
    };
    run_episode(&load_task(), &dec, &EpisodeOptions::default())
}

/// (b) A threshold no backend meets, so the rotation ends in the buffer.
pub fn rotation_trace() -> EpisodeTrace {
    let opts = EpisodeOptions {
        tau: Some(1e-6),
        ..Default::default()
    };
    run_episode(&load_task(), &ScriptedDecomposer::default(), &opts)
}

/// (c) One iteration only, spent on the faulty draft.
pub fn budget_one_trace() -> EpisodeTrace {
    let dec = ScriptedDecomposer {
        fault: Some(Fault::UnimplementedFirst),
        ..Default::default()
    };
    let opts = EpisodeOptions {
        budget: 1,
        ..Default::default()
    };
    run_episode(&load_task(), &dec, &opts)
}
