use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use rayon::prelude::*;
use rsl_core::dataset::write_dataset;
use rsl_core::grounding::{ground_pddl, save_ground_task};
use rsl_core::nn::{load_model, model_to_bytes, save_model};
use rsl_core::search::{GoalCount, HAdd, NeuralHeuristic, SearchResult};
use rsl_core::seed::{derive_seed, Stream};
use rsl_core::{HeuristicModel, RslConfig, SearchBudget, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::manifest::{sha256_hex, write_json, ExperimentManifest, GridSpec, StateSpec};
use crate::pipeline::{load_task, records, run_searches, start_states, thread_pool, train_pipeline, write_jsonl, LoadedTask, Summary};
use crate::{EvalArgs, GridArgs, GroundArgs, HeuristicArg, SelectArgs, TrainArgs};

pub const MODEL_FILE: &str = "model.rslm";
pub const DATASET_FILE: &str = "dataset.csv";
pub const DATASET_SIDECAR: &str = "dataset.json";
pub const HISTORY_FILE: &str = "history.json";
pub const ROLLOUTS_FILE: &str = "rollouts.json";
pub const RESULTS_FILE: &str = "results.jsonl";
pub const SUMMARY_FILE: &str = "summary.json";
pub const GRID_FILE: &str = "grid.csv";
pub const SELECTION_FILE: &str = "selection.json";
pub const SELECTED_MODEL: &str = "selected.rslm";

pub fn ground(a: &GroundArgs) -> CliResult<()> {
    let read = |p: &Path| fs::read_to_string(p).with_context(|| format!("reading {}", p.display()));
    let domain = read(&a.domain)?;
    let problem = read(&a.problem)?;
    let (bundle, report) = ground_pddl(&domain, &problem).map_err(|e| {
        CliError::input(format!("{} + {}: {e}", a.domain.display(), a.problem.display()))
    })?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    save_ground_task(&bundle.task, &bundle.mutexes, &bundle.reachable, &a.out)?;
    println!(
        "atoms {}  actions {}  reachable {}  mutex pairs {}",
        bundle.task.num_atoms(),
        bundle.task.num_actions(),
        bundle.reachable.len(),
        bundle.mutexes.count()
    );
    if !report.dropped_actions.is_empty() {
        println!("dropped {} actions with empty add lists", report.dropped_actions.len());
    }
    Ok(())
}

/// What `train` produced.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub dir: PathBuf,
    pub model_sha256: String,
    pub num_records: usize,
    pub epochs: usize,
}

pub fn train(a: &TrainArgs) -> CliResult<TrainOutcome> {
    let task = load_task(&a.task)?;
    let seed = a.common.seed;
    let rsl = a.rsl.config(seed);
    let net = a.net.config(seed);
    rsl.validate()?;
    net.validate()?;

    let out = &a.common.out;
    let mut manifest = ExperimentManifest::new("train", &a.task, task.sha256.clone(), seed, out);
    manifest.rsl_config = Some(rsl.clone());
    manifest.train_config = Some(net);
    manifest.write(out)?;

    let trained = train_pipeline(&task.bundle, &rsl, &net)?;
    fs::write(out.join(ROLLOUTS_FILE), trained.regressions.to_json_bytes())?;
    write_dataset(&trained.dataset, &task.sha256, &rsl, out.join(DATASET_FILE), out.join(DATASET_SIDECAR))?;
    save_model(&trained.model, out.join(MODEL_FILE))?;
    write_json(&out.join(HISTORY_FILE), &trained.history)?;

    let outcome = TrainOutcome {
        dir: out.clone(),
        model_sha256: sha256_hex(&model_to_bytes(&trained.model)),
        num_records: trained.dataset.len(),
        epochs: trained.history.epochs.len(),
    };
    println!(
        "{} records, {} epochs ({:?}), model sha256 {}",
        outcome.num_records, outcome.epochs, trained.history.stop_reason, outcome.model_sha256
    );
    Ok(outcome)
}

fn checked_model(path: &Path, task: &LoadedTask) -> CliResult<HeuristicModel> {
    let model = load_model(path).map_err(|e| CliError::input(format!("{}: {e}", path.display())))?;
    if model.num_atoms() != task.bundle.task.num_atoms() {
        return Err(CliError::input(format!(
            "model {} expects {} atoms but the task has {}",
            path.display(),
            model.num_atoms(),
            task.bundle.task.num_atoms()
        )));
    }
    Ok(model)
}

fn search_all(task: &LoadedTask, which: HeuristicArg, model: Option<&HeuristicModel>, states: &[rsl_core::State], budget: &SearchBudget) -> Vec<SearchResult> {
    let t = &task.bundle.task;
    match which {
        HeuristicArg::Rsl => run_searches(t, &NeuralHeuristic::new(model.expect("model checked")), states, budget),
        HeuristicArg::GoalCount => run_searches(t, &GoalCount { task: t }, states, budget),
        HeuristicArg::HAdd => run_searches(t, &HAdd::new(t, &task.bundle.reachable), states, budget),
    }
}

fn heuristic_label(h: HeuristicArg) -> &'static str {
    match h {
        HeuristicArg::Rsl => "rsl",
        HeuristicArg::GoalCount => "goal-count",
        HeuristicArg::HAdd => "h-add",
    }
}

pub fn eval(a: &EvalArgs) -> CliResult<Summary> {
    let task = load_task(&a.task)?;
    let which = match (a.heuristic, &a.model) {
        (None | Some(HeuristicArg::Rsl), Some(_)) => HeuristicArg::Rsl,
        (Some(HeuristicArg::Rsl) | None, None) => {
            return Err(CliError::input("--heuristic rsl needs --model"));
        }
        (Some(h), Some(_)) => {
            return Err(CliError::input(format!("--model cannot be combined with --heuristic {}", heuristic_label(h))));
        }
        (Some(h), None) => h,
    };
    let model = a.model.as_deref().map(|p| checked_model(p, &task)).transpose()?;
    let budget = a.budget.budget();
    budget.validate()?;
    let pool = thread_pool(a.common.jobs)?;
    let name = a.name.clone().unwrap_or_else(|| heuristic_label(which).to_string());
    let seed = a.common.seed;

    let out = &a.common.out;
    let mut manifest = ExperimentManifest::new("eval", &a.task, task.sha256.clone(), seed, out);
    manifest.budget = Some(budget.clone());
    manifest.states = Some(StateSpec {
        count: a.states,
        walk_steps: a.walk_steps,
        seed,
        purpose: "eval".into(),
    });
    manifest.heuristic = Some(name.clone());
    manifest.write(out)?;

    let t = &task.bundle.task;
    let states = start_states(t, a.states, a.walk_steps, seed, Stream::EvalStates);
    let results = pool.install(|| search_all(&task, which, model.as_ref(), &states, &budget));
    write_jsonl(&out.join(RESULTS_FILE), &records(&task.instance, &name, seed, t.num_atoms(), &results))?;
    let summary = Summary::of(&task.instance, &name, &results)?;
    write_json(&out.join(SUMMARY_FILE), &summary)?;
    println!(
        "{}: coverage {:.1}% ({}/{}), median expansions {}, median plan length {}",
        name,
        summary.coverage,
        summary.solved,
        summary.num_states,
        fmt_opt(summary.median_expansions),
        fmt_opt(summary.median_plan_length)
    );
    Ok(summary)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x}"))
}

/// One line of `grid.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub index: usize,
    pub config: RslConfig,
    pub ok: bool,
    pub coverage: Option<f64>,
    pub median_expansions: Option<f64>,
    pub median_plan_length: Option<f64>,
    pub epochs: Option<usize>,
    pub error: Option<String>,
}

const GRID_HEADER: &str = "index,nt,pr,nr,len,mode,seed,status,coverage,median_expansions,median_plan_length,epochs,error";

fn grid_csv(rows: &[GridRow]) -> String {
    let mut s = format!("{GRID_HEADER}\n");
    for r in rows {
        let c = &r.config;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.index,
            c.num_states,
            c.random_percent,
            c.num_rollouts,
            c.length,
            c.mode,
            c.seed,
            if r.ok { "ok" } else { "failed" },
            r.coverage.map_or(String::new(), |v| v.to_string()),
            r.median_expansions.map_or(String::new(), |v| v.to_string()),
            r.median_plan_length.map_or(String::new(), |v| v.to_string()),
            r.epochs.map_or(String::new(), |v| v.to_string()),
            r.error.as_deref().unwrap_or("").replace([',', '\n'], ";"),
        );
    }
    s
}

fn train_and_eval(
    task: &LoadedTask,
    rsl: &RslConfig,
    net: &TrainConfig,
    states: &[rsl_core::State],
    budget: &SearchBudget,
    name: &str,
    dir: &Path,
) -> CliResult<(Summary, usize)> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let trained = train_pipeline(&task.bundle, rsl, net)?;
    save_model(&trained.model, dir.join(MODEL_FILE))?;
    write_json(&dir.join(HISTORY_FILE), &trained.history)?;
    let t = &task.bundle.task;
    let h = NeuralHeuristic {
        model: &trained.model,
        name: name.to_string(),
    };
    let results = run_searches(t, &h, states, budget);
    write_jsonl(&dir.join(RESULTS_FILE), &records(&task.instance, name, rsl.seed, t.num_atoms(), &results))?;
    let summary = Summary::of(&task.instance, name, &results)?;
    write_json(&dir.join(SUMMARY_FILE), &summary)?;
    Ok((summary, trained.history.epochs.len()))
}

pub fn grid(a: &GridArgs) -> CliResult<Vec<GridRow>> {
    let task = load_task(&a.task)?;
    let seed = a.common.seed;
    let spec = GridSpec {
        num_states: a.nt.clone(),
        random_percent: a.pr.clone(),
        num_rollouts: a.nr.clone(),
        length: a.len.clone(),
        mode: a.mode.into(),
        eval_states: a.eval_states,
    };
    if spec.is_empty() {
        return Err(CliError::input("every grid list needs at least one value"));
    }
    let configs = spec.configs(|i| derive_seed(seed, Stream::GridConfig, i as u64));
    for c in &configs {
        c.validate()?;
    }
    let net_template = a.net.config(0);
    net_template.validate()?;
    let budget = a.budget.budget();
    budget.validate()?;
    let pool = thread_pool(a.common.jobs)?;

    let out = &a.common.out;
    let mut manifest = ExperimentManifest::new("grid", &a.task, task.sha256.clone(), seed, out);
    manifest.train_config = Some(net_template);
    manifest.budget = Some(budget.clone());
    manifest.states = Some(StateSpec {
        count: a.eval_states,
        walk_steps: a.walk_steps,
        seed,
        purpose: "eval".into(),
    });
    manifest.grid = Some(spec);
    manifest.write(out)?;

    let states = start_states(&task.bundle.task, a.eval_states, a.walk_steps, seed, Stream::EvalStates);
    let rows: Vec<GridRow> = pool.install(|| {
        configs
            .par_iter()
            .enumerate()
            .map(|(i, cfg)| {
                let net = TrainConfig { seed: cfg.seed, ..net_template };
                let dir = out.join(format!("config-{i:02}"));
                let name = format!("rsl-config-{i:02}");
                match train_and_eval(&task, cfg, &net, &states, &budget, &name, &dir) {
                    Ok((s, epochs)) => GridRow {
                        index: i,
                        config: cfg.clone(),
                        ok: true,
                        coverage: Some(s.coverage),
                        median_expansions: s.median_expansions,
                        median_plan_length: s.median_plan_length,
                        epochs: Some(epochs),
                        error: None,
                    },
                    Err(e) => {
                        log::warn!("config {i} failed: {e}");
                        GridRow {
                            index: i,
                            config: cfg.clone(),
                            ok: false,
                            coverage: None,
                            median_expansions: None,
                            median_plan_length: None,
                            epochs: None,
                            error: Some(e.to_string()),
                        }
                    }
                }
            })
            .collect()
    });
    fs::write(out.join(GRID_FILE), grid_csv(&rows))?;
    for r in &rows {
        println!(
            "config {:2}: N_t={} P_r={} N_r={} L={} -> {}",
            r.index,
            r.config.num_states,
            r.config.random_percent,
            r.config.num_rollouts,
            r.config.length,
            r.coverage.map_or_else(|| "failed".to_string(), |c| format!("{c:.1}%"))
        );
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub seed: u64,
    pub model: PathBuf,
    pub coverage: f64,
    pub median_expansions: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub candidates: Vec<Candidate>,
    pub selected_seed: u64,
    pub selected_model: PathBuf,
}

/// Highest coverage, then fewer median expansions, then the lower seed.
pub fn select_best(candidates: &[Candidate]) -> Option<&Candidate> {
    candidates.iter().min_by(|a, b| {
        b.coverage
            .total_cmp(&a.coverage)
            .then_with(|| {
                let ea = a.median_expansions.unwrap_or(f64::INFINITY);
                let eb = b.median_expansions.unwrap_or(f64::INFINITY);
                ea.total_cmp(&eb)
            })
            .then(a.seed.cmp(&b.seed))
    })
}

pub fn validate_select(a: &SelectArgs) -> CliResult<Selection> {
    if a.k == 0 {
        return Err(CliError::input("-k must be at least 1"));
    }
    let task = load_task(&a.task)?;
    let seed = a.common.seed;
    let seeds: Vec<u64> = (0..a.k as u64).map(|i| seed.wrapping_add(i)).collect();
    for &s in &seeds {
        a.rsl.config(s).validate()?;
    }
    a.net.config(seed).validate()?;
    let budget = a.budget.budget();
    budget.validate()?;
    let pool = thread_pool(a.common.jobs)?;

    let out = &a.common.out;
    let mut manifest = ExperimentManifest::new("validate-select", &a.task, task.sha256.clone(), seed, out);
    manifest.rsl_config = Some(a.rsl.config(seed));
    manifest.train_config = Some(a.net.config(seed));
    manifest.budget = Some(budget.clone());
    manifest.states = Some(StateSpec {
        count: a.validation_states,
        walk_steps: a.walk_steps,
        seed,
        purpose: "validation".into(),
    });
    manifest.num_models = Some(a.k);
    manifest.write(out)?;

    let states = start_states(&task.bundle.task, a.validation_states, a.walk_steps, seed, Stream::ValidationStates);
    let candidates: Vec<Candidate> = pool.install(|| {
        seeds
            .par_iter()
            .map(|&s| {
                let dir = out.join(format!("seed-{s}"));
                let (summary, _) = train_and_eval(&task, &a.rsl.config(s), &a.net.config(s), &states, &budget, &format!("rsl-seed-{s}"), &dir)?;
                Ok(Candidate {
                    seed: s,
                    model: dir.join(MODEL_FILE),
                    coverage: summary.coverage,
                    median_expansions: summary.median_expansions,
                })
            })
            .collect::<CliResult<Vec<_>>>()
    })?;
    let best = select_best(&candidates).expect("k >= 1").clone();
    fs::copy(&best.model, out.join(SELECTED_MODEL))?;
    let selection = Selection {
        selected_seed: best.seed,
        selected_model: out.join(SELECTED_MODEL),
        candidates,
    };
    write_json(&out.join(SELECTION_FILE), &selection)?;
    println!(
        "selected seed {} (validation coverage {:.1}%)",
        best.seed, best.coverage
    );
    Ok(selection)
}
