//! End-to-end acceptance checks. Runs as a plain binary so every criterion
//! prints a PASS/FAIL line; pass criterion numbers as arguments to run a
//! subset (`cargo test -p rsl-cli --test acceptance -- 4 5`).

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use rand::seq::index::sample;
use rand::Rng;
use rsl_cli::pipeline::{run_searches, start_states, train_pipeline};
use rsl_core::dataset::{complete_preimage, sample_states};
use rsl_core::fixtures::{self, random_task, BLOCKSWORLD_3, BLOCKSWORLD_4, CHAIN_5, GRIPPER_2};
use rsl_core::grounding::{compute_mutexes, compute_reachable_actions, MutexTable};
use rsl_core::nn::{backward, encode_states, evaluate_mse, init_model, mse_loss};
use rsl_core::regression::{run_regressions, valid_regression_actions, RegressionContext};
use rsl_core::search::{exact_distance, median, GoalCount, NeuralHeuristic, StateSpace};
use rsl_core::seed::{rng_for, Stream};
use rsl_core::strips::{apply_action, is_goal};
use rsl_core::{Bitset, GroundTask, HeuristicModel, PreImage, ReachableActions, RslConfig, SearchBudget, SelectionMode, State, TrainConfig};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rsl(nt: usize, pr: f64, nr: usize, len: usize, mode: SelectionMode, seed: u64) -> RslConfig {
    RslConfig {
        num_rollouts: nr,
        length: len,
        num_states: nt,
        random_percent: pr,
        mode,
        seed,
        completion_density: None,
    }
}

/// 1. Completions of every pre-image reach the goal by replaying the
/// reversed action prefix within `i` steps.
fn regression_soundness() -> Outcome {
    let start = Instant::now();
    let (mut rollouts, mut checks, mut failures) = (0, 0u64, 0u64);
    for (k, f) in [BLOCKSWORLD_3, BLOCKSWORLD_4, GRIPPER_2, CHAIN_5].iter().enumerate() {
        let b = f.ground();
        let t = &b.task;
        let ctx = RegressionContext::new(t, &b.reachable, &b.mutexes);
        let density = t.init().count_ones() as f64 / t.num_atoms() as f64;
        for (m, mode) in [SelectionMode::Novelty, SelectionMode::Random].into_iter().enumerate() {
            let set = run_regressions(&ctx, 125, 50, mode, (10 * k + m) as u64).unwrap();
            let mut rng = rng_for(k as u64, Stream::Sampling, m as u64);
            rollouts += set.rollouts.len();
            for r in &set.rollouts {
                for (i, x) in r.preimages.iter().enumerate() {
                    for _ in 0..10 {
                        let mut s = complete_preimage(x, t, &b.mutexes, &mut rng, density);
                        let mut ok = is_goal(&s, t);
                        for &a in r.actions[..i].iter().rev() {
                            match apply_action(&s, t.action(a)) {
                                Ok(next) => s = next,
                                Err(_) => break,
                            }
                            ok |= is_goal(&s, t);
                        }
                        checks += 1;
                        failures += u64::from(!ok);
                    }
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && rollouts >= 1000 && elapsed < Duration::from_secs(120),
        format!("{rollouts} rollouts over 4 domains, {checks} completions replayed, {failures} failures, {elapsed:.1?}"),
    )
}

/// 2. Labels never undercut the true goal distance of reachable states.
fn label_upper_bound() -> Outcome {
    let (mut checked, mut violations) = (0, 0);
    for f in [BLOCKSWORLD_3, BLOCKSWORLD_4, GRIPPER_2, CHAIN_5] {
        let b = f.ground();
        let t = &b.task;
        let space = StateSpace::explore(t, &t.initial_state(), 100_000).expect("fixture fits the cap");
        for (k, cfg) in [rsl(2_000, 50.0, 5, 50, SelectionMode::Novelty, 1), rsl(2_000, 0.0, 1, 20, SelectionMode::Random, 2)]
            .iter()
            .enumerate()
        {
            let ctx = RegressionContext::new(t, &b.reachable, &b.mutexes);
            let set = run_regressions(&ctx, cfg.num_rollouts, cfg.length, cfg.mode, cfg.seed + k as u64).unwrap();
            let ds = sample_states(&set, t, &b.mutexes, cfg).unwrap();
            for r in &ds.records {
                if !space.contains(&r.state) || r.label as usize > cfg.length {
                    continue;
                }
                let d = exact_distance(t, &r.state, 1_000_000).unwrap();
                checked += 1;
                if d.is_none_or(|d| d > r.label as usize) {
                    violations += 1;
                }
            }
        }
    }
    outcome(
        violations == 0 && checked > 0,
        format!("{checked} reachable sampled states with d(s) <= L, {violations} violations"),
    )
}

/// 3. No reachable state holds a computed mutex pair.
fn mutex_soundness() -> Outcome {
    let mut parts = Vec::new();
    let mut pass = true;
    for f in [BLOCKSWORLD_3, GRIPPER_2] {
        let b = f.ground();
        let space = StateSpace::explore(&b.task, &b.task.initial_state(), 1_000_000).unwrap();
        let bad = space.states().iter().filter(|s| b.mutexes.has_mutex_pair(s.bits())).count();
        pass &= bad == 0;
        parts.push(format!("{}: {} states, {} mutex pairs, {bad} violations", f.name, space.len(), b.mutexes.count()));
    }
    outcome(pass, parts.join("; "))
}

/// Admissible regression actions checked clause by clause.
fn naive_valid(x: &PreImage, t: &GroundTask, r: &ReachableActions, m: &MutexTable) -> Vec<usize> {
    let xs: Vec<usize> = x.0.ones().collect();
    (0..t.num_actions())
        .filter(|&i| {
            let a = t.action(i);
            let e_del = |q: usize| !a.add.contains(q) && a.pre.ones().any(|p| m.is_mutex(p, q));
            let pre_image: Vec<usize> = (0..t.num_atoms())
                .filter(|&p| (x.0.contains(p) && !a.add.contains(p)) || a.pre.contains(p))
                .collect();
            r.contains(i)
                && xs.iter().all(|&q| !e_del(q))
                && xs.iter().all(|&q| !a.del.contains(q))
                && xs.iter().any(|&q| a.add.contains(q))
                && pre_image.iter().all(|&p| pre_image.iter().all(|&q| !m.is_mutex(p, q)))
        })
        .collect()
}

/// 4. Fast admissibility filter equals the clause-by-clause reference.
fn admissibility_reference() -> Outcome {
    let mut rng = rng_for(40, Stream::GridConfig, 4);
    let (mut cases, mut mismatches, mut nonempty) = (0, 0, 0);
    while cases < 10_000 {
        let n = rng.gen_range(4..=10);
        let acts = rng.gen_range(3..=16);
        let t = random_task(&mut rng, n, acts);
        let r = compute_reachable_actions(&t);
        let m = compute_mutexes(&t, &r);
        for _ in 0..10 {
            let x = if rng.gen_bool(0.2) {
                t.goal_preimage()
            } else {
                let k = rng.gen_range(1..=n.min(4));
                PreImage(Bitset::from_ids(n, sample(&mut rng, n, k).into_vec()))
            };
            let fast = valid_regression_actions(&x, &t, &r, &m);
            nonempty += usize::from(!fast.is_empty());
            mismatches += usize::from(fast != naive_valid(&x, &t, &r, &m));
            cases += 1;
        }
    }
    outcome(
        mismatches == 0,
        format!("{cases} random cases ({nonempty} with candidates), {mismatches} mismatches"),
    )
}

fn batch_loss(m: &HeuristicModel, states: &[Bitset], targets: &[f64]) -> f64 {
    let preds = m.forward_matrix(encode_states(m.num_atoms(), states.iter())).unwrap();
    mse_loss(preds.as_slice().unwrap(), targets).unwrap()
}

/// 5. Analytic gradients against central finite differences.
fn gradient_check() -> Outcome {
    const STEP: f64 = 1e-5;
    let mut rng = rng_for(50, Stream::EvalStates, 5);
    let (mut compared, mut worst, mut bad) = (0, 0.0f64, 0);
    for pair in 0..6u64 {
        let n = 5 + 3 * pair as usize;
        let mut m = init_model(n, 100 + pair);
        for layer in &mut m.layers {
            layer.bias.mapv_inplace(|_| rng.gen_range(-0.1..0.1));
        }
        let states: Vec<Bitset> = (0..16).map(|_| Bitset::from_ids(n, (0..n).filter(|_| rng.gen_bool(0.4)))).collect();
        let targets: Vec<f64> = (0..16).map(|_| rng.gen_range(0.0..20.0)).collect();
        let (grads, _) = backward(&m, encode_states(n, states.iter()), &targets).unwrap();
        let mut taken = 0;
        let mut attempts = 0;
        while taken < 25 && attempts < 1_000 {
            attempts += 1;
            let k = rng.gen_range(0..m.layers.len());
            let bias = rng.gen_bool(0.25);
            let (o, i) = (rng.gen_range(0..m.layers[k].outputs()), rng.gen_range(0..m.layers[k].inputs()));
            let param = |m: &mut HeuristicModel| -> *mut f64 {
                if bias {
                    &mut m.layers[k].bias[o]
                } else {
                    &mut m.layers[k].weights[[o, i]]
                }
            };
            let analytic = if bias { grads[k].bias[o] } else { grads[k].weights[[o, i]] };
            let p = param(&mut m);
            // SAFETY: `p` points into `m`, which is not moved or resized while it is used.
            let orig = unsafe { *p };
            unsafe { *p = orig + STEP };
            let up = batch_loss(&m, &states, &targets);
            unsafe { *p = orig - STEP };
            let down = batch_loss(&m, &states, &targets);
            unsafe { *p = orig };
            let numeric = (up - down) / (2.0 * STEP);
            let scale = analytic.abs().max(numeric.abs());
            if scale < 1e-7 {
                // dead unit or inactive input: both sides are zero, skip
                continue;
            }
            let rel = (analytic - numeric).abs() / scale;
            worst = worst.max(rel);
            bad += usize::from(rel > 1e-4);
            compared += 1;
            taken += 1;
        }
    }
    outcome(
        bad == 0 && compared >= 100,
        format!("{compared} coordinates over 6 model/batch pairs, worst relative error {worst:.2e}"),
    )
}

fn split_rmse(model: &HeuristicModel, ds: &rsl_core::LabeledDataset, train: bool) -> f64 {
    let xs: Vec<&Bitset> = ds.split(train).map(|r| r.state.bits()).collect();
    let ys: Vec<f64> = ds.split(train).map(|r| r.label as f64).collect();
    evaluate_mse(model, &xs, &ys).unwrap().sqrt()
}

/// 6. The default recipe fits 1,000 regression-labelled blocksworld states.
fn training_sanity() -> Outcome {
    let b = BLOCKSWORLD_4.ground();
    let mut parts = Vec::new();
    let mut pass = true;
    for seed in 0..3 {
        let start = Instant::now();
        let trained = train_pipeline(&b, &rsl(1_000, 0.0, 5, 50, SelectionMode::Novelty, seed), &TrainConfig { seed, ..TrainConfig::default() }).unwrap();
        let rmse = split_rmse(&trained.model, &trained.dataset, true);
        let elapsed = start.elapsed();
        pass &= rmse <= 1.0 && elapsed <= Duration::from_secs(300) && trained.history.epochs.len() <= 1000;
        parts.push(format!("seed {seed}: train RMSE {rmse:.3} after {} epochs in {elapsed:.1?}", trained.history.epochs.len()));
    }
    // the same recipe with half random states, for reference only
    let mixed = train_pipeline(&b, &rsl(1_000, 50.0, 5, 50, SelectionMode::Novelty, 0), &TrainConfig::default()).unwrap();
    parts.push(format!("(P_r=50 reference: train RMSE {:.3})", split_rmse(&mixed.model, &mixed.dataset, true)));
    outcome(pass, parts.join("; "))
}

/// 7. Learned heuristic against goal count on random-walk start states.
fn desk_scale_efficacy() -> Outcome {
    let b = BLOCKSWORLD_4.ground();
    let t = &b.task;
    let budget = SearchBudget::expansions(100_000);
    let mut good = 0;
    let mut parts = Vec::new();
    for seed in 0..10u64 {
        let trained = train_pipeline(&b, &rsl(10_000, 50.0, 5, 50, SelectionMode::Novelty, seed), &TrainConfig { seed, ..TrainConfig::default() }).unwrap();
        let states = start_states(t, 20, 200, seed, Stream::EvalStates);
        let learned = run_searches(t, &NeuralHeuristic::new(&trained.model), &states, &budget);
        let baseline = run_searches(t, &GoalCount { task: t }, &states, &budget);
        let solved = learned.iter().filter(|r| r.solved()).count();
        let common: Vec<(f64, f64)> = learned
            .iter()
            .zip(&baseline)
            .filter(|(l, g)| l.solved() && g.solved())
            .map(|(l, g)| (l.expansions as f64, g.expansions as f64))
            .collect();
        let ml = median(&common.iter().map(|c| c.0).collect::<Vec<_>>()).unwrap_or(f64::INFINITY);
        let mg = median(&common.iter().map(|c| c.1).collect::<Vec<_>>()).unwrap_or(f64::INFINITY);
        let ok = solved * 100 >= 90 * states.len() && ml <= mg;
        good += usize::from(ok);
        parts.push(format!("seed {seed}: {solved}/20 solved, median {ml} vs {mg}{}", if ok { "" } else { " (miss)" }));
    }
    outcome(good >= 8, format!("{good}/10 seeds meet the bar [{}]", parts.join("; ")))
}

/// 8. Novelty selection covers at least as many atoms as random selection.
fn novelty_coverage() -> Outcome {
    let b = BLOCKSWORLD_4.ground();
    let ctx = RegressionContext::new(&b.task, &b.reachable, &b.mutexes);
    let mean_atoms = |mode: SelectionMode| -> f64 {
        let mut total = 0.0;
        let mut n = 0.0;
        for seed in 0..10 {
            let set = run_regressions(&ctx, 5, 50, mode, seed).unwrap();
            for r in &set.rollouts {
                total += r.atom_union().count_ones() as f64;
                n += 1.0;
            }
        }
        total / n
    };
    let novelty = mean_atoms(SelectionMode::Novelty);
    let random = mean_atoms(SelectionMode::Random);
    outcome(
        novelty >= random,
        format!("mean unique atoms per trajectory: novelty {novelty:.2}, random {random:.2} (of {})", b.task.num_atoms()),
    )
}

/// 9. Work counters stay within their bounds on every run.
fn work_bounds() -> Outcome {
    let (mut runs, mut violations) = (0, 0);
    for f in fixtures::ALL {
        let b = f.ground();
        let t = &b.task;
        let ctx = RegressionContext::new(t, &b.reachable, &b.mutexes);
        for mode in [SelectionMode::Novelty, SelectionMode::Random] {
            for (nr, len, nt, pr) in [(1, 50, 500, 0.0), (5, 50, 2_000, 50.0), (5, 200, 1_000, 20.0), (3, 10, 3_000, 100.0)] {
                let cfg = rsl(nt, pr, nr, len, mode, runs as u64);
                let set = run_regressions(&ctx, nr, len, mode, cfg.seed).unwrap();
                let ds = sample_states(&set, t, &b.mutexes, &cfg).unwrap();
                let examined_ok = set.stats.candidates_examined <= (nr * len * t.num_actions()) as u64;
                let tests_ok = ds.stats.subset_tests <= (nt * (nr * len + nr)) as u64;
                violations += usize::from(!(examined_ok && tests_ok));
                runs += 1;
            }
        }
    }
    outcome(violations == 0, format!("{runs} runs, {violations} over budget"))
}

fn rsl_bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rsl"))
}

fn run_ok(cmd: &mut Command) -> bool {
    cmd.output().map(|o| o.status.success()).unwrap_or(false)
}

fn sha256_of(path: &Path) -> String {
    rsl_cli::manifest::sha256_hex(&fs::read(path).unwrap())
}

/// 10. Repeated training is byte-identical; the default grid has 16 rows.
fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let fx = Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures");
    let task = d.join("bw4.json");
    if !run_ok(rsl_bin().arg("ground").arg(fx.join("blocksworld-domain.pddl")).arg(fx.join("blocksworld-4.pddl")).arg("--out").arg(&task)) {
        return outcome(false, "grounding failed".into());
    }
    let train = |out: &str| {
        run_ok(rsl_bin().args(["train", "--nt", "10000", "--len", "50", "--nr", "5", "--pr", "50", "--seed", "7", "--task"]).arg(&task).arg("--out").arg(d.join(out)))
    };
    if !(train("a") && train("b")) {
        return outcome(false, "training run failed".into());
    }
    let same = |f: &str| fs::read(d.join("a").join(f)).unwrap() == fs::read(d.join("b").join(f)).unwrap();
    let data_same = same("dataset.csv") && same("dataset.json");
    let (ha, hb) = (sha256_of(&d.join("a/model.rslm")), sha256_of(&d.join("b/model.rslm")));

    let grid_ok = run_ok(
        rsl_bin()
            .args(["grid", "--max-epochs", "1", "--eval-states", "2", "--max-expansions", "2000", "--seed", "3", "--task"])
            .arg(&task)
            .arg("--out")
            .arg(d.join("grid")),
    );
    let rows = fs::read_to_string(d.join("grid/grid.csv"))
        .map(|s| s.lines().skip(1).filter(|l| !l.is_empty()).count())
        .unwrap_or(0);
    outcome(
        data_same && ha == hb && grid_ok && rows == 16,
        format!("datasets identical: {data_same}, model sha256 {}… twice: {}, grid rows: {rows}", &ha[..12], ha == hb),
    )
}

fn evals_per_second(model: &HeuristicModel, states: &[State]) -> f64 {
    let start = Instant::now();
    let mut n = 0usize;
    while start.elapsed() < Duration::from_millis(1500) {
        for chunk in states.chunks(8) {
            std::hint::black_box(model.forward_batch(chunk).unwrap());
            n += chunk.len();
        }
    }
    n as f64 / start.elapsed().as_secs_f64()
}

/// 11. Evaluation throughput degrades at most 20x for 10x the atoms.
fn evaluation_linearity() -> Outcome {
    let small = BLOCKSWORLD_4.ground();
    let large = fixtures::blocksworld(16);
    let ratio_atoms = large.task.num_atoms() as f64 / small.task.num_atoms() as f64;
    let rate = |b: &rsl_core::GroundBundle| {
        let model = init_model(b.task.num_atoms(), 1);
        let states = start_states(&b.task, 512, 200, 1, Stream::EvalStates);
        evals_per_second(&model, &states)
    };
    let (rs, rl) = (rate(&small), rate(&large));
    outcome(
        ratio_atoms >= 10.0 && rs / rl <= 20.0,
        format!(
            "{} atoms: {rs:.0} evals/s, {} atoms ({ratio_atoms:.1}x): {rl:.0} evals/s, slowdown {:.2}x",
            small.task.num_atoms(),
            large.task.num_atoms(),
            rs / rl
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("regression soundness", regression_soundness),
        ("label upper bound vs BFS distance", label_upper_bound),
        ("mutex soundness", mutex_soundness),
        ("admissible regression actions vs reference", admissibility_reference),
        ("gradient correctness", gradient_check),
        ("training sanity", training_sanity),
        ("desk-scale efficacy", desk_scale_efficacy),
        ("novelty atom coverage", novelty_coverage),
        ("work counter bounds", work_bounds),
        ("determinism and grid size", determinism),
        ("evaluation cost linearity", evaluation_linearity),
    ];
    // libtest-style flags (e.g. --nocapture) are ignored; numbers select criteria
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let id = i + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = check();
        println!(
            "criterion {id:2} {} {name} ({:.1?}): {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed(),
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {failed} failed");
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
