use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use rayon::prelude::*;
use tsr_core::benchgen::{generate, is_known_family};
use tsr_core::dataset::{load_dataset, load_task, save_dataset};
use tsr_core::decomposer::{Decomposer, LlmDecomposer, LlmMode, ScriptedDecomposer};
use tsr_core::evaluator::{aggregate, evaluate_outcome, execution_failed, rejected, EvalResult, Reason, Rejection, Report};
use tsr_core::executor::{run_episode, EpisodeOptions, EpisodeTrace, StopReason};
use tsr_core::http::{DenyNetwork, Transport};
use tsr_core::plan::{has_errors, parse_plan, serialize_plan, validate_plan, EnvTypes};
use tsr_core::registry::{ExecCtx, Registry};
use tsr_core::retrieval::{RetrievalClient, RetrievalMode};
use tsr_core::task::TaskInstance;
use tsr_core::ValueKind;

use crate::answers::{read_answer, write_answer, AnswerError};
use crate::config::{DecomposerKind, FileConfig};
use crate::{env_err, CliError, EvalArgs, GenArgs, PlanArgs, RunArgs};

/// Decomposer failures that point at the environment rather than the task.
const ENVIRONMENT_CODES: [&str; 3] = ["EndpointUnreachable", "AuthMissing", "FixtureMissing"];

fn transport(live: bool) -> Arc<dyn Transport> {
    if live {
        Arc::new(tsr_core::http::UreqTransport::new(std::time::Duration::from_secs(60)))
    } else {
        Arc::new(DenyNetwork::default())
    }
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| env_err(format!("{}: {e}", dir.display())))?;
    }
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    tsr_core::io::write_atomic(path, text.as_bytes()).map_err(env_err)
}

fn finish_report(results: &[EvalResult], report_path: Option<&Path>) -> Result<Report, CliError> {
    let report = aggregate(results).map_err(env_err)?;
    print!("{}", report.render_table());
    if let Some(path) = report_path {
        write_json(path, &report)?;
        println!("report: {}", path.display());
    }
    Ok(report)
}

pub fn gen(a: &GenArgs) -> Result<(), CliError> {
    let mut cfg = FileConfig::load_or_default(a.config.as_deref())?.gen;
    if let Some(seed) = a.seed {
        cfg.master_seed = seed;
    }
    if !a.families.is_empty() {
        cfg.families = a.families.clone();
    }
    if let Some(bad) = cfg.families.iter().find(|f| !is_known_family(f)) {
        return Err(CliError::Usage(format!("unknown family `{bad}`")));
    }
    if let Some(n) = a.n {
        cfg.predictive_per_kind = n;
        cfg.anomaly_per_variant = n;
        cfg.causal_count = n;
    }
    let tasks = generate(&cfg).map_err(env_err)?;
    let manifest = save_dataset(&a.out, cfg.master_seed, &tasks).map_err(env_err)?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for e in &manifest.entries {
        *counts.entry(e.family.as_str()).or_insert(0) += 1;
    }
    for (family, n) in &counts {
        println!("{family:<32} {n:>5}");
    }
    println!("wrote {} tasks to {}", manifest.entries.len(), a.out.display());
    Ok(())
}

pub fn run(a: &RunArgs) -> Result<(), CliError> {
    let file = FileConfig::load_or_default(a.config.as_deref())?;
    let mut cfg = file.run;
    let mut llm = file.llm;
    let mut retrieval = file.retrieval;
    if a.dataset.is_some() {
        cfg.dataset = a.dataset.clone();
    }
    if let Some(d) = a.decomposer {
        cfg.decomposer = d;
    }
    if let Some(b) = a.budget {
        cfg.budget = b;
    }
    if a.tau.is_some() {
        cfg.tau = a.tau;
    }
    if let Some(p) = a.parallelism {
        cfg.parallelism = p;
    }
    if let Some(r) = &a.report {
        cfg.report = r.clone();
    }
    if let Some(t) = &a.traces {
        cfg.traces = t.clone();
    }
    if a.answers.is_some() {
        cfg.answers = a.answers.clone();
    }
    cfg.no_project |= a.no_project;
    if let Some(m) = a.llm_mode {
        llm.mode = m.into();
    }
    if let Some(f) = &a.fixtures {
        llm.fixtures_dir = f.clone();
    }
    if let Some(u) = &a.base_url {
        llm.base_url = u.clone();
    }
    if let Some(m) = &a.model {
        llm.model = m.clone();
    }
    if let Some(k) = &a.api_key_env {
        llm.api_key_env = k.clone();
    }
    if let Some(m) = a.retrieval_mode {
        retrieval.mode = m.into();
    }
    if let Some(c) = &a.cache_dir {
        retrieval.cache_dir = c.clone();
    }
    cfg.validate()?;
    if cfg.no_project && cfg.decomposer != DecomposerKind::Scripted {
        return Err(CliError::Usage("--no-project applies only to the scripted decomposer".into()));
    }
    let dataset = cfg
        .dataset
        .clone()
        .ok_or_else(|| CliError::Usage("no dataset given (--dataset or run.dataset)".into()))?;
    let tasks = load_dataset(&dataset).map_err(env_err)?;
    if tasks.is_empty() {
        return Err(CliError::Env(format!("dataset {} has no tasks", dataset.display())));
    }

    let decomposer: Box<dyn Decomposer> = match cfg.decomposer {
        DecomposerKind::Scripted => Box::new(ScriptedDecomposer {
            no_project: cfg.no_project,
            fault: None,
        }),
        DecomposerKind::Llm => {
            let live = llm.mode != LlmMode::Replay;
            Box::new(LlmDecomposer::new(llm, transport(live)))
        }
    };
    let client = RetrievalClient::new(retrieval.clone(), transport(retrieval.mode == RetrievalMode::Live));
    let opts = EpisodeOptions {
        budget: cfg.budget,
        tau: cfg.tau,
        ctx: ExecCtx {
            retrieval: Some(&client),
        },
    };
    fs::create_dir_all(&cfg.traces).map_err(|e| env_err(format!("{}: {e}", cfg.traces.display())))?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.parallelism)
        .build()
        .map_err(env_err)?;
    let one = |t: &TaskInstance| -> Result<(EvalResult, EpisodeTrace), CliError> {
        let trace = run_episode(t, decomposer.as_ref(), &opts);
        let result = evaluate_outcome(&trace.final_outcome, t);
        write_json(&cfg.traces.join(format!("{}.json", t.id)), &trace)?;
        if let (Some(dir), Some(value)) = (&cfg.answers, trace.final_outcome.result()) {
            write_answer(&dir.join(&t.id), value).map_err(|e| env_err(format!("{}: {e}", dir.display())))?;
        }
        Ok((result, trace))
    };
    let done: Vec<(EvalResult, EpisodeTrace)> =
        pool.install(|| tasks.par_iter().map(one).collect::<Result<Vec<_>, _>>())?;

    let results: Vec<EvalResult> = done.iter().map(|(r, _)| r.clone()).collect();
    finish_report(&results, Some(&cfg.report))?;
    let env_failures: Vec<String> = done
        .iter()
        .filter(|(_, tr)| tr.stop == StopReason::DecomposerError)
        .filter_map(|(_, tr)| tr.final_outcome.error())
        .filter(|e| ENVIRONMENT_CODES.contains(&e.code.as_str()))
        .map(|e| e.message.clone())
        .collect();
    if let Some(first) = env_failures.first() {
        return Err(CliError::Env(format!(
            "{} task(s) could not reach the decomposer; first: {first}",
            env_failures.len()
        )));
    }
    Ok(())
}

pub fn eval(a: &EvalArgs) -> Result<(), CliError> {
    let tasks = load_dataset(&a.dataset).map_err(env_err)?;
    if tasks.is_empty() {
        return Err(CliError::Env(format!("dataset {} has no tasks", a.dataset.display())));
    }
    if !a.outputs.is_dir() {
        return Err(CliError::Env(format!("outputs directory {} not found", a.outputs.display())));
    }
    let results: Vec<EvalResult> = tasks
        .iter()
        .map(|t| match read_answer(&a.outputs.join(&t.id), t) {
            Ok(v) => tsr_core::evaluator::evaluate(&v, t),
            Err(AnswerError::Missing) => execution_failed(t, "no answer file"),
            Err(AnswerError::Malformed(m)) => rejected(t, Rejection::new(Reason::ShapeMismatch, m)),
        })
        .collect();
    finish_report(&results, a.report.as_deref())?;
    Ok(())
}

fn parse_var(spec: &str) -> Result<(String, Option<ValueKind>), CliError> {
    match spec.split_once('=') {
        None => Ok((spec.to_string(), None)),
        Some((name, kind)) => {
            let k: ValueKind = serde_json::from_value(serde_json::Value::String(kind.to_string()))
                .map_err(|_| CliError::Usage(format!("unknown value kind `{kind}` in --var {spec}")))?;
            Ok((name.to_string(), Some(k)))
        }
    }
}

pub fn plan(a: &PlanArgs) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.file).map_err(|e| env_err(format!("{}: {e}", a.file.display())))?;
    let plan = parse_plan(&text).map_err(|e| CliError::Usage(format!("{}: {e}", a.file.display())))?;
    let (mut env, contract): (EnvTypes, _) = match &a.task {
        Some(dir) => {
            let t = load_task(dir).map_err(env_err)?;
            (t.env_types(), Some(t.output_contract.kind))
        }
        None => (EnvTypes::new(), None),
    };
    for v in &a.vars {
        let (name, kind) = parse_var(v)?;
        env.insert(name, kind);
    }
    let registry = Registry::standard();
    print!("{}", serialize_plan(&registry.canonical_plan(&plan)));
    let diagnostics = validate_plan(&plan, &env, registry, contract);
    for d in &diagnostics {
        println!("step {}: {:?} {}: {}", d.step_index, d.severity, d.code, d.message);
    }
    if has_errors(&diagnostics) {
        return Err(CliError::Usage(format!("{} is not a valid plan", a.file.display())));
    }
    println!("ok: {} steps", plan.steps.len());
    Ok(())
}
