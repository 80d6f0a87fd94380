//! Cross-heuristic comparisons over results files.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context as _;
use rsl_core::search::{median, ResultRecord};
use walkdir::WalkDir;

use crate::error::{CliError, CliResult};
use crate::ReportArgs;

pub const SUMMARY_CSV: &str = "summary.csv";
pub const PAIRWISE_CSV: &str = "pairwise.csv";
pub const PAIRS_DIR: &str = "pairs";
pub const EVALS_CSV: &str = "evals_per_second.csv";

/// `(instance, state index)`
type Key = (String, usize);

pub fn collect_results(dir: &Path) -> CliResult<Vec<ResultRecord>> {
    let mut files: Vec<PathBuf> = WalkDir::new(dir)
        .sort_by_file_name()
        .into_iter()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_type().is_file() && e.path().extension().is_some_and(|x| x == "jsonl"))
        .map(|e| e.into_path())
        .collect();
    files.sort();
    let mut out = Vec::new();
    for f in files {
        let text = fs::read_to_string(&f).with_context(|| format!("reading {}", f.display()))?;
        for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let r: ResultRecord = serde_json::from_str(line)
                .map_err(|e| CliError::input(format!("{}:{}: {e}", f.display(), n + 1)))?;
            out.push(r);
        }
    }
    Ok(out)
}

/// Per-heuristic results keyed by start state; the first record wins when a
/// key repeats.
fn by_heuristic(records: &[ResultRecord]) -> BTreeMap<String, HashMap<Key, &ResultRecord>> {
    let mut map: BTreeMap<String, HashMap<Key, &ResultRecord>> = BTreeMap::new();
    for r in records {
        let slot = map.entry(r.heuristic_name.clone()).or_default();
        let key = (r.instance.clone(), r.state_index);
        if slot.contains_key(&key) {
            log::warn!("duplicate result for {} on {:?}; keeping the first", r.heuristic_name, key);
            continue;
        }
        slot.insert(key, r);
    }
    map
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |x| x.to_string())
}

/// Comparison of two heuristics over the start states both solved.
#[derive(Debug, Clone, PartialEq)]
pub struct PairStats {
    pub common_solved: usize,
    pub median_expansions_a: Option<f64>,
    pub median_expansions_b: Option<f64>,
    pub median_plan_length_a: Option<f64>,
    pub median_plan_length_b: Option<f64>,
    pub pct_a_fewer: f64,
    pub pct_b_fewer: f64,
    pub pct_equal: f64,
}

pub fn compare(a: &HashMap<Key, &ResultRecord>, b: &HashMap<Key, &ResultRecord>) -> (PairStats, Vec<(Key, ResultRecord, ResultRecord)>) {
    let mut common: Vec<(Key, ResultRecord, ResultRecord)> = a
        .iter()
        .filter(|(_, r)| r.solved())
        .filter_map(|(k, ra)| b.get(k).filter(|rb| rb.solved()).map(|rb| (k.clone(), (*ra).clone(), (*rb).clone())))
        .collect();
    common.sort_by(|x, y| x.0.cmp(&y.0));
    let n = common.len();
    let pct = |c: usize| if n == 0 { 0.0 } else { 100.0 * c as f64 / n as f64 };
    let fewer_a = common.iter().filter(|(_, x, y)| x.expansions < y.expansions).count();
    let fewer_b = common.iter().filter(|(_, x, y)| y.expansions < x.expansions).count();
    let col = |f: &dyn Fn(&(Key, ResultRecord, ResultRecord)) -> Option<f64>| -> Option<f64> {
        median(&common.iter().filter_map(f).collect::<Vec<_>>())
    };
    let stats = PairStats {
        common_solved: n,
        median_expansions_a: col(&|c| Some(c.1.expansions as f64)),
        median_expansions_b: col(&|c| Some(c.2.expansions as f64)),
        median_plan_length_a: col(&|c| c.1.plan_length.map(|l| l as f64)),
        median_plan_length_b: col(&|c| c.2.plan_length.map(|l| l as f64)),
        pct_a_fewer: pct(fewer_a),
        pct_b_fewer: pct(fewer_b),
        pct_equal: pct(n - fewer_a - fewer_b),
    };
    (stats, common)
}

fn file_safe(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

pub fn report(a: &ReportArgs) -> CliResult<()> {
    let records = collect_results(&a.results)?;
    if records.is_empty() {
        return Err(CliError::input(format!("no results found under {}", a.results.display())));
    }
    fs::create_dir_all(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let groups = by_heuristic(&records);

    let mut summary = String::from("heuristic,records,solved,coverage,median_expansions,median_plan_length\n");
    for (name, rs) in &groups {
        let solved: Vec<&&ResultRecord> = rs.values().filter(|r| r.solved()).collect();
        let exp: Vec<f64> = solved.iter().map(|r| r.expansions as f64).collect();
        let len: Vec<f64> = solved.iter().filter_map(|r| r.plan_length).map(|l| l as f64).collect();
        let _ = writeln!(
            summary,
            "{name},{},{},{},{},{}",
            rs.len(),
            solved.len(),
            100.0 * solved.len() as f64 / rs.len() as f64,
            opt(median(&exp)),
            opt(median(&len))
        );
    }
    fs::write(a.out.join(SUMMARY_CSV), summary)?;

    // evaluations per second against task size, one row per (heuristic, instance)
    let mut evals: BTreeMap<(String, String), (usize, u64, f64)> = BTreeMap::new();
    for r in &records {
        let e = evals.entry((r.heuristic_name.clone(), r.instance.clone())).or_insert((r.num_atoms, 0, 0.0));
        e.1 += r.evaluations;
        e.2 += r.elapsed_sec;
    }
    let mut eps = String::from("heuristic,instance,num_atoms,evaluations,elapsed_sec,evals_per_sec\n");
    for ((h, inst), (atoms, n, secs)) in &evals {
        let rate = if *secs > 0.0 { *n as f64 / secs } else { 0.0 };
        let _ = writeln!(eps, "{h},{inst},{atoms},{n},{secs},{rate}");
    }
    fs::write(a.out.join(EVALS_CSV), eps)?;

    let names: Vec<&String> = groups.keys().collect();
    if names.len() >= 2 {
        let pairs_dir = a.out.join(PAIRS_DIR);
        fs::create_dir_all(&pairs_dir)?;
        let mut pairwise = String::from(
            "heuristic_a,heuristic_b,common_solved,median_expansions_a,median_expansions_b,median_plan_length_a,median_plan_length_b,pct_a_fewer_expansions,pct_b_fewer_expansions,pct_equal_expansions\n",
        );
        for (i, ha) in names.iter().enumerate() {
            for hb in &names[i + 1..] {
                let (s, common) = compare(&groups[*ha], &groups[*hb]);
                let _ = writeln!(
                    pairwise,
                    "{ha},{hb},{},{},{},{},{},{},{},{}",
                    s.common_solved,
                    opt(s.median_expansions_a),
                    opt(s.median_expansions_b),
                    opt(s.median_plan_length_a),
                    opt(s.median_plan_length_b),
                    s.pct_a_fewer,
                    s.pct_b_fewer,
                    s.pct_equal
                );
                let mut detail = String::from("instance,state_index,expansions_a,expansions_b,plan_length_a,plan_length_b\n");
                for ((inst, idx), ra, rb) in &common {
                    let _ = writeln!(
                        detail,
                        "{inst},{idx},{},{},{},{}",
                        ra.expansions,
                        rb.expansions,
                        ra.plan_length.map_or(String::new(), |v| v.to_string()),
                        rb.plan_length.map_or(String::new(), |v| v.to_string())
                    );
                }
                fs::write(pairs_dir.join(format!("{}__{}.csv", file_safe(ha), file_safe(hb))), detail)?;
            }
        }
        fs::write(a.out.join(PAIRWISE_CSV), pairwise)?;
    }
    println!("{} records from {} heuristics", records.len(), groups.len());
    Ok(())
}
