//! Library-level building blocks shared by the subcommands.

use std::fs;
use std::path::Path;

use anyhow::Context as _;
use rayon::prelude::*;
use rsl_core::dataset::{sample_states, LabeledDataset};
use rsl_core::grounding::{load_ground_task, GroundBundle};
use rsl_core::nn::{init_model, train};
use rsl_core::regression::{run_regressions, RegressionContext, RegressionSet};
use rsl_core::search::{coverage, gbfs, median, random_walk_states, Heuristic, ResultRecord, SearchResult};
use rsl_core::seed::{rng_for, Stream};
use rsl_core::{GroundTask, HeuristicModel, RslConfig, SearchBudget, State, TrainConfig, TrainHistory};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::manifest::sha256_hex;

/// A grounded task file with its hash.
pub struct LoadedTask {
    pub bundle: GroundBundle,
    pub sha256: String,
    pub instance: String,
}

pub fn load_task(path: &Path) -> CliResult<LoadedTask> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let bundle = load_ground_task(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    Ok(LoadedTask {
        bundle,
        sha256: sha256_hex(&bytes),
        instance: path
            .file_stem()
            .map_or_else(|| "task".to_string(), |s| s.to_string_lossy().into_owned()),
    })
}

pub struct Trained {
    pub regressions: RegressionSet,
    pub dataset: LabeledDataset,
    pub model: HeuristicModel,
    pub history: TrainHistory,
}

/// Regression rollouts, state sampling and network training in sequence.
pub fn train_pipeline(bundle: &GroundBundle, rsl: &RslConfig, train_cfg: &TrainConfig) -> rsl_core::Result<Trained> {
    rsl.validate()?;
    train_cfg.validate()?;
    let t = &bundle.task;
    let ctx = RegressionContext::new(t, &bundle.reachable, &bundle.mutexes);
    let regressions = run_regressions(&ctx, rsl.num_rollouts, rsl.length, rsl.mode, rsl.seed)?;
    log::info!(
        "{} rollouts, {} non-root pre-images",
        regressions.rollouts.len(),
        regressions.num_nonroot()
    );
    let dataset = sample_states(&regressions, t, &bundle.mutexes, rsl)?;
    log::info!("sampled {} labelled states", dataset.len());
    let (model, history) = train(&init_model(t.num_atoms(), train_cfg.seed), &dataset, train_cfg)?;
    log::info!(
        "trained {} epochs, best validation MSE {:.4}",
        history.epochs.len(),
        history.epochs[history.best_epoch].validation_mse
    );
    Ok(Trained {
        regressions,
        dataset,
        model,
        history,
    })
}

/// Start states for evaluation (`Stream::EvalStates`) or model selection
/// (`Stream::ValidationStates`).
pub fn start_states(t: &GroundTask, count: usize, walk_steps: usize, seed: u64, stream: Stream) -> Vec<State> {
    random_walk_states(t, count, walk_steps, &mut rng_for(seed, stream, 0))
}

/// One search per start state, run on the current rayon pool. Results are in
/// start-state order.
pub fn run_searches<H: Heuristic + Sync>(t: &GroundTask, h: &H, states: &[State], budget: &SearchBudget) -> Vec<SearchResult> {
    states.par_iter().map(|s| gbfs(t, s, h, budget)).collect()
}

pub fn thread_pool(jobs: usize) -> CliResult<rayon::ThreadPool> {
    if jobs == 0 {
        return Err(CliError::input("--jobs must be at least 1"));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::input(format!("thread pool: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub instance: String,
    pub heuristic: String,
    pub num_states: usize,
    pub solved: usize,
    pub coverage: f64,
    pub median_expansions: Option<f64>,
    pub median_plan_length: Option<f64>,
    pub total_evaluations: u64,
    pub total_elapsed_sec: f64,
    pub evals_per_sec: f64,
}

impl Summary {
    pub fn of(instance: &str, heuristic: &str, results: &[SearchResult]) -> CliResult<Self> {
        let solved: Vec<&SearchResult> = results.iter().filter(|r| r.solved()).collect();
        let exp: Vec<f64> = solved.iter().map(|r| r.expansions as f64).collect();
        let len: Vec<f64> = solved.iter().filter_map(|r| r.plan_length()).map(|l| l as f64).collect();
        let total_evaluations = results.iter().map(|r| r.evaluations).sum();
        let total_elapsed_sec: f64 = results.iter().map(|r| r.elapsed_sec).sum();
        Ok(Self {
            instance: instance.to_string(),
            heuristic: heuristic.to_string(),
            num_states: results.len(),
            solved: solved.len(),
            coverage: coverage(results)?,
            median_expansions: median(&exp),
            median_plan_length: median(&len),
            total_evaluations,
            total_elapsed_sec,
            evals_per_sec: if total_elapsed_sec > 0.0 {
                total_evaluations as f64 / total_elapsed_sec
            } else {
                0.0
            },
        })
    }
}

pub fn records(instance: &str, heuristic: &str, seed: u64, num_atoms: usize, results: &[SearchResult]) -> Vec<ResultRecord> {
    results
        .iter()
        .enumerate()
        .map(|(i, r)| ResultRecord::new(instance, i, heuristic, seed, num_atoms, r))
        .collect()
}

pub fn write_jsonl(path: &Path, records: &[ResultRecord]) -> CliResult<()> {
    let mut out = Vec::new();
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    fs::write(path, out).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
