//! Greedy best-first search ordered purely by heuristic value.

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::search::heuristics::Heuristic;
use crate::search::validate_plan;
use crate::strips::{applicable_actions, is_goal, progress, ActionId, GroundTask, State};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchBudget {
    pub max_expansions: Option<u64>,
    pub time_limit_sec: Option<f64>,
    /// Cap on stored search nodes (open and closed together).
    pub max_nodes: Option<usize>,
}

impl SearchBudget {
    pub fn expansions(n: u64) -> Self {
        Self {
            max_expansions: Some(n),
            time_limit_sec: None,
            max_nodes: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_expansions.is_none() && self.time_limit_sec.is_none() && self.max_nodes.is_none() {
            return Err(Error::InvalidConfig("search budget needs at least one finite limit".into()));
        }
        if let Some(t) = self.time_limit_sec {
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidConfig(format!("time limit {t} is not a finite non-negative number")));
            }
        }
        Ok(())
    }
}

impl Default for SearchBudget {
    fn default() -> Self {
        Self {
            max_expansions: Some(100_000),
            time_limit_sec: Some(360.0),
            max_nodes: Some(10_000_000),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchStatus {
    Solved,
    Exhausted,
    BudgetExceeded,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub status: SearchStatus,
    pub plan: Option<Vec<ActionId>>,
    pub expansions: u64,
    pub evaluations: u64,
    pub elapsed_sec: f64,
}

impl SearchResult {
    pub fn solved(&self) -> bool {
        self.status == SearchStatus::Solved
    }

    pub fn plan_length(&self) -> Option<usize> {
        self.plan.as_ref().map(Vec::len)
    }
}

#[derive(PartialEq)]
struct Key(f64, u64);

impl Eq for Key {}

impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

struct Node {
    state: State,
    parent: Option<(usize, ActionId)>,
}

fn extract_plan(nodes: &[Node], mut i: usize) -> Vec<ActionId> {
    let mut plan = Vec::new();
    while let Some((p, a)) = nodes[i].parent {
        plan.push(a);
        i = p;
    }
    plan.reverse();
    plan
}

/// Runs GBFS from `s0`. States with infinite heuristic value are pruned.
pub fn gbfs(t: &GroundTask, s0: &State, h: &dyn Heuristic, budget: &SearchBudget) -> SearchResult {
    assert_eq!(s0.width(), t.num_atoms(), "initial state width does not match task");
    let start = Instant::now();
    let deadline = budget
        .time_limit_sec
        .map(|s| start + Duration::from_secs_f64(s));
    let mut expansions = 0u64;
    let mut evaluations = 0u64;

    let finish = |status, plan: Option<Vec<ActionId>>, expansions, evaluations| {
        if let Some(p) = &plan {
            assert!(validate_plan(t, s0, p), "search produced an invalid plan");
        }
        SearchResult {
            status,
            plan,
            expansions,
            evaluations,
            elapsed_sec: start.elapsed().as_secs_f64(),
        }
    };

    if is_goal(s0, t) {
        return finish(SearchStatus::Solved, Some(Vec::new()), 0, 0);
    }

    let mut nodes = vec![Node { state: s0.clone(), parent: None }];
    let mut seen: HashMap<State, usize> = HashMap::from([(s0.clone(), 0)]);
    let mut open = BinaryHeap::new();
    let mut seq = 0u64;
    let h0 = h.evaluate(s0);
    evaluations += 1;
    if h0.is_finite() {
        open.push(Reverse((Key(h0, seq), 0usize)));
        seq += 1;
    }

    loop {
        if open.is_empty() {
            return finish(SearchStatus::Exhausted, None, expansions, evaluations);
        }
        let over = budget.max_expansions.is_some_and(|m| expansions >= m)
            || deadline.is_some_and(|d| Instant::now() >= d)
            || budget.max_nodes.is_some_and(|m| nodes.len() >= m);
        if over {
            return finish(SearchStatus::BudgetExceeded, None, expansions, evaluations);
        }
        let Reverse((_, idx)) = open.pop().expect("checked non-empty");
        expansions += 1;

        let parent = nodes[idx].state.clone();
        let mut fresh = Vec::new();
        let mut fresh_states = Vec::new();
        for a in applicable_actions(&parent, t) {
            let next = progress(&parent, t.action(a));
            if seen.contains_key(&next) {
                continue;
            }
            let id = nodes.len();
            seen.insert(next.clone(), id);
            nodes.push(Node {
                state: next.clone(),
                parent: Some((idx, a)),
            });
            if is_goal(&next, t) {
                let plan = extract_plan(&nodes, id);
                return finish(SearchStatus::Solved, Some(plan), expansions, evaluations);
            }
            fresh.push(id);
            fresh_states.push(next);
        }
        if fresh.is_empty() {
            continue;
        }
        let values = h.evaluate_batch(&fresh_states);
        evaluations += values.len() as u64;
        for (id, v) in fresh.into_iter().zip(values) {
            if v.is_finite() {
                open.push(Reverse((Key(v, seq), id)));
                seq += 1;
            }
        }
    }
}
