//! Search, baseline heuristics and evaluation helpers.

mod gbfs;
mod heuristics;
mod oracle;
mod walks;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::strips::{apply_action, is_goal, ActionId, GroundTask, State};

pub use gbfs::{gbfs, SearchBudget, SearchResult, SearchStatus};
pub use heuristics::{goal_count_h, h_add, GoalCount, HAdd, Heuristic, NeuralHeuristic, PerfectHeuristic};
pub use oracle::{exact_distance, StateSpace, DEFAULT_STATE_CAP};
pub use walks::{random_walk, random_walk_states};

/// True iff `plan` is applicable step by step from `s0` and ends in a goal state.
pub fn validate_plan(t: &GroundTask, s0: &State, plan: &[ActionId]) -> bool {
    let mut s = s0.clone();
    for &a in plan {
        if a >= t.num_actions() {
            return false;
        }
        match apply_action(&s, t.action(a)) {
            Ok(next) => s = next,
            Err(_) => return false,
        }
    }
    is_goal(&s, t)
}

/// Percentage of solved results.
pub fn coverage<'a, I>(results: I) -> Result<f64>
where
    I: IntoIterator<Item = &'a SearchResult>,
{
    let (mut solved, mut total) = (0usize, 0usize);
    for r in results {
        total += 1;
        solved += r.solved() as usize;
    }
    if total == 0 {
        return Err(Error::EmptyResults);
    }
    Ok(100.0 * solved as f64 / total as f64)
}

/// Median of a non-empty list (mean of the middle pair for even lengths).
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { (v[m - 1] + v[m]) / 2.0 })
}

/// One line of a results file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub instance: String,
    pub state_index: usize,
    pub heuristic_name: String,
    pub seed: u64,
    pub status: SearchStatus,
    pub plan_length: Option<usize>,
    pub expansions: u64,
    pub evaluations: u64,
    pub elapsed_sec: f64,
    pub num_atoms: usize,
}

impl ResultRecord {
    pub fn new(instance: &str, state_index: usize, heuristic: &str, seed: u64, num_atoms: usize, r: &SearchResult) -> Self {
        Self {
            instance: instance.to_string(),
            state_index,
            heuristic_name: heuristic.to_string(),
            seed,
            status: r.status,
            plan_length: r.plan_length(),
            expansions: r.expansions,
            evaluations: r.evaluations,
            elapsed_sec: r.elapsed_sec,
            num_atoms,
        }
    }

    pub fn solved(&self) -> bool {
        self.status == SearchStatus::Solved
    }
}
