//! End-to-end runs of the `tsr` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tsr(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsr"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn gen_small(dir: &Path, name: &str, seed: &str) {
    let o = tsr(&["gen", "--seed", seed, "--n", "2", "--out", name], dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gen_is_deterministic_and_filters() {
    let tmp = tempfile::tempdir().unwrap();
    gen_small(tmp.path(), "a", "11");
    gen_small(tmp.path(), "b", "11");
    let read = |d: &str| fs::read(tmp.path().join(d).join("manifest.json")).unwrap();
    assert_eq!(read("a"), read("b"));

    let o = tsr(&["gen", "--seed", "11", "--n", "2", "--family", "causal", "--out", "c"], tmp.path());
    assert_eq!(code(&o), 0);
    let manifest: serde_json::Value = serde_json::from_slice(&read("c")).unwrap();
    assert_eq!(manifest["entries"].as_array().unwrap().len(), 2);

    let o = tsr(&["gen", "--family", "weather", "--out", "d"], tmp.path());
    assert_eq!(code(&o), 2);
    assert!(!tmp.path().join("d").exists());
}

#[test]
fn run_then_eval_agree() {
    let tmp = tempfile::tempdir().unwrap();
    gen_small(tmp.path(), "ds", "5");
    let o = tsr(
        &["run", "--dataset", "ds", "--report", "run.json", "--traces", "tr", "--answers", "ans"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let run_table = stdout(&o);
    assert!(run_table.contains("predictive:max_load"));
    let traces = fs::read_dir(tmp.path().join("tr")).unwrap().count();
    assert_eq!(traces, 3 * 4 * 2 + 2 * 2 + 2);

    let o = tsr(&["eval", "--outputs", "ans", "--dataset", "ds", "--report", "eval.json"], tmp.path());
    assert_eq!(code(&o), 0);
    let run: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("run.json")).unwrap()).unwrap();
    let eval: serde_json::Value = serde_json::from_slice(&fs::read(tmp.path().join("eval.json")).unwrap()).unwrap();
    assert_eq!(run["families"], eval["families"]);
}

#[test]
fn parallel_run_gives_the_same_report() {
    let tmp = tempfile::tempdir().unwrap();
    gen_small(tmp.path(), "ds", "8");
    for (p, report) in [("1", "r1.json"), ("4", "r4.json")] {
        let o = tsr(
            &["run", "--dataset", "ds", "--parallelism", p, "--report", report, "--traces", &format!("t{p}")],
            tmp.path(),
        );
        assert_eq!(code(&o), 0);
    }
    let r1 = fs::read(tmp.path().join("r1.json")).unwrap();
    let r4 = fs::read(tmp.path().join("r4.json")).unwrap();
    assert_eq!(r1, r4);
}

#[test]
fn budget_of_one_still_completes() {
    let tmp = tempfile::tempdir().unwrap();
    gen_small(tmp.path(), "ds", "2");
    let o = tsr(&["run", "--dataset", "ds", "--budget", "1"], tmp.path());
    assert_eq!(code(&o), 0);
    let o = tsr(&["run", "--dataset", "ds", "--budget", "0"], tmp.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn eval_handles_missing_and_malformed_answers() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tsr(&["gen", "--seed", "3", "--n", "2", "--family", "anomaly:rate", "--out", "ds"], tmp.path());
    assert_eq!(code(&o), 0);
    fs::create_dir_all(tmp.path().join("out")).unwrap();
    let o = tsr(&["eval", "--outputs", "out", "--dataset", "ds", "--report", "empty.json"], tmp.path());
    assert_eq!(code(&o), 0);
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("empty.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], 0);
    assert_eq!(report["families"][0]["errors"]["ExecutionFailed"], 2);

    let bad = tmp.path().join("out/anomaly_rate-000");
    fs::create_dir_all(&bad).unwrap();
    fs::write(bad.join("answer.csv"), "label\n0\n1\nnot-a-number\n").unwrap();
    let o = tsr(&["eval", "--outputs", "out", "--dataset", "ds", "--report", "mixed.json"], tmp.path());
    assert_eq!(code(&o), 0);
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("mixed.json")).unwrap()).unwrap();
    let errors = &report["families"][0]["errors"];
    assert_eq!((errors["ShapeMismatch"].as_u64(), errors["ExecutionFailed"].as_u64()), (Some(1), Some(1)));

    let o = tsr(&["eval", "--outputs", "nowhere", "--dataset", "ds"], tmp.path());
    assert_eq!(code(&o), 3);
    let o = tsr(&["run", "--dataset", "missing"], tmp.path());
    assert_eq!(code(&o), 3);
}

#[test]
fn plan_command_validates() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(
        tmp.path().join("good.txt"),
        "TEST_SCORE = AnomalDetOP(data=VAL)\nFINAL_RESULT = convertBinaryOP(data=TEST_SCORE, percentile=0.05)\n",
    )
    .unwrap();
    let o = tsr(&["plan", "good.txt", "--var", "VAL=series"], tmp.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("ok: 2 steps"));

    let o = tsr(&["plan", "good.txt"], tmp.path());
    assert_eq!(code(&o), 2);

    fs::write(tmp.path().join("bad.txt"), "X = forecast_uni(VAL, 24)\n").unwrap();
    let o = tsr(&["plan", "bad.txt", "--var", "VAL"], tmp.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn ops_lists_the_registry() {
    let tmp = tempfile::tempdir().unwrap();
    let o = tsr(&["ops"], tmp.path());
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    for op in ["forecast_uni", "project", "CausalMatrixOP", "convertBinaryOP"] {
        assert!(text.contains(op), "{op} missing");
    }
}

#[test]
fn bad_config_is_a_usage_error() {
    let tmp = tempfile::tempdir().unwrap();
    fs::write(tmp.path().join("c.toml"), "[run]\nbugdet = 3\n").unwrap();
    let o = tsr(&["run", "--config", "c.toml", "--dataset", "x"], tmp.path());
    assert_eq!(code(&o), 2);
}
