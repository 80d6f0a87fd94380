use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures").join(name)
}

fn rsl(args: &[&str], paths: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_rsl"));
    cmd.args(args);
    for (flag, p) in paths {
        if !flag.is_empty() {
            cmd.arg(flag);
        }
        cmd.arg(p);
    }
    cmd.output().expect("binary runs")
}

fn ground(dir: &Path, domain: &str, problem: &str) -> PathBuf {
    let out = dir.join(format!("{problem}.json"));
    let o = rsl(&["ground"], &[("", &fixture(domain)), ("", &fixture(problem)), ("--out", &out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

fn quick_train(dir: &Path, task: &Path, out: &str, seed: &str) -> PathBuf {
    let out = dir.join(out);
    let o = rsl(
        &["train", "--nt", "200", "--nr", "2", "--len", "10", "--pr", "25", "--max-epochs", "3", "--seed", seed],
        &[("--task", task), ("--out", &out)],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn ground_writes_task_json() {
    let d = TempDir::new().unwrap();
    let task = ground(d.path(), "gripper-domain.pddl", "gripper-2.pddl");
    let v = read_json(&task);
    assert!(v.is_object());
}

#[test]
fn unsupported_or_missing_input_exits_2() {
    let d = TempDir::new().unwrap();
    let out = d.path().join("t.json");
    let adl = rsl(&["ground"], &[("", &fixture("adl-domain.pddl")), ("", &fixture("gripper-2.pddl")), ("--out", &out)]);
    assert_eq!(adl.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&adl.stderr).is_empty());
    let missing = rsl(&["ground"], &[("", &d.path().join("nope.pddl")), ("", &fixture("gripper-2.pddl")), ("--out", &out)]);
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn out_of_range_percent_exits_2() {
    let d = TempDir::new().unwrap();
    let task = ground(d.path(), "blocksworld-domain.pddl", "blocksworld-3.pddl");
    let o = rsl(&["train", "--pr", "150"], &[("--task", &task), ("--out", &d.path().join("x"))]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn train_writes_requested_records_and_manifest() {
    let d = TempDir::new().unwrap();
    let task = ground(d.path(), "blocksworld-domain.pddl", "blocksworld-3.pddl");
    let out = quick_train(d.path(), &task, "run", "1");
    let csv = fs::read_to_string(out.join("dataset.csv")).unwrap();
    assert_eq!(csv.lines().count(), 200 + 1);
    assert!(out.join("model.rslm").exists());
    let m = read_json(&out.join("manifest.json"));
    assert_eq!(m["seed"], 1);
    assert_eq!(m["command"], "train");
}

#[test]
fn eval_baseline_and_model_checks() {
    let d = TempDir::new().unwrap();
    let task = ground(d.path(), "blocksworld-domain.pddl", "blocksworld-3.pddl");
    let out = d.path().join("gc");
    let o = rsl(&["eval", "--heuristic", "goal-count", "--states", "5"], &[("--task", &task), ("--out", &out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&out.join("summary.json"));
    assert_eq!(s["num_states"], 5);
    assert_eq!(fs::read_to_string(out.join("results.jsonl")).unwrap().lines().count(), 5);

    let other = ground(d.path(), "gripper-domain.pddl", "gripper-2.pddl");
    let model = quick_train(d.path(), &other, "gripper", "0").join("model.rslm");
    let o = rsl(&["eval"], &[("--task", &task), ("--model", &model), ("--out", &d.path().join("bad"))]);
    assert_eq!(o.status.code(), Some(2));

    let out = d.path().join("zero");
    let o = rsl(&["eval", "--heuristic", "h-add", "--states", "3", "--max-expansions", "0", "--walk-steps", "50"], &[("--task", &task), ("--out", &out)]);
    assert!(o.status.success());
    for line in fs::read_to_string(out.join("results.jsonl")).unwrap().lines() {
        let r: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(r["status"] == "budget-exceeded" || r["status"] == "solved" && r["plan_length"] == 0, "{r}");
    }
}

#[test]
fn grid_with_singleton_lists_has_one_row() {
    let d = TempDir::new().unwrap();
    let task = ground(d.path(), "blocksworld-domain.pddl", "blocksworld-3.pddl");
    let out = d.path().join("grid");
    let o = rsl(
        &["grid", "--nt", "100", "--pr", "0", "--nr", "1", "--len", "10", "--max-epochs", "1", "--eval-states", "2"],
        &[("--task", &task), ("--out", &out)],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(out.join("grid.csv")).unwrap().lines().count(), 2);
}

#[test]
fn validate_select_copies_the_winner() {
    let d = TempDir::new().unwrap();
    let task = ground(d.path(), "blocksworld-domain.pddl", "blocksworld-3.pddl");
    let out = d.path().join("sel");
    let o = rsl(
        &["validate-select", "--k", "2", "--nt", "100", "--nr", "1", "--len", "10", "--max-epochs", "1", "--validation-states", "2"],
        &[("--task", &task), ("--out", &out)],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let sel = read_json(&out.join("selection.json"));
    assert_eq!(sel["candidates"].as_array().unwrap().len(), 2);
    assert!(out.join("selected.rslm").exists());
}

#[test]
fn report_summarizes_and_compares() {
    let d = TempDir::new().unwrap();
    let task = ground(d.path(), "blocksworld-domain.pddl", "blocksworld-3.pddl");
    let results = d.path().join("results");
    for h in ["goal-count", "h-add"] {
        let o = rsl(&["eval", "--heuristic", h, "--states", "4"], &[("--task", &task), ("--out", &results.join(h))]);
        assert!(o.status.success());
    }
    let out = d.path().join("report");
    let o = rsl(&["report"], &[("--results", &results), ("--out", &out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(out.join("summary.csv")).unwrap().lines().count(), 3);
    assert!(out.join("pairwise.csv").exists());

    let single = d.path().join("single");
    let o = rsl(&["report"], &[("--results", &results.join("h-add")), ("--out", &single)]);
    assert!(o.status.success());
    assert!(single.join("summary.csv").exists());
    assert!(!single.join("pairwise.csv").exists());

    let o = rsl(&["report"], &[("--results", &d.path().join("empty-nowhere")), ("--out", &single)]);
    assert_eq!(o.status.code(), Some(2));
}
