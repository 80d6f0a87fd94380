//! Heuristic functions usable by [`gbfs`](super::gbfs).

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::grounding::ReachableActions;
use crate::nn::HeuristicModel;
use crate::search::oracle::StateSpace;
use crate::strips::{ActionId, GroundTask, State};

pub trait Heuristic {
    fn name(&self) -> &str;

    /// Estimated goal distance; `f64::INFINITY` marks a recognized dead end.
    fn evaluate(&self, s: &State) -> f64;

    fn evaluate_batch(&self, states: &[State]) -> Vec<f64> {
        states.iter().map(|s| self.evaluate(s)).collect()
    }
}

/// `|G \ s|`
pub fn goal_count_h(s: &State, t: &GroundTask) -> usize {
    t.goal().difference_count(s.bits())
}

pub struct GoalCount<'a> {
    pub task: &'a GroundTask,
}

impl Heuristic for GoalCount<'_> {
    fn name(&self) -> &str {
        "goal-count"
    }

    fn evaluate(&self, s: &State) -> f64 {
        goal_count_h(s, self.task) as f64
    }
}

/// Additive delete-relaxation heuristic over a fixed action subset.
pub struct HAdd<'a> {
    task: &'a GroundTask,
    actions: Vec<ActionId>,
    /// For each atom, positions in `actions` that need it.
    watchers: Vec<Vec<usize>>,
}

impl<'a> HAdd<'a> {
    pub fn new(task: &'a GroundTask, reachable: &ReachableActions) -> Self {
        let actions: Vec<ActionId> = reachable.ids().collect();
        let mut watchers = vec![Vec::new(); task.num_atoms()];
        for (k, &a) in actions.iter().enumerate() {
            for p in task.action(a).pre.ones() {
                watchers[p].push(k);
            }
        }
        Self { task, actions, watchers }
    }

    /// `None` if some goal atom is unreachable from `s`.
    pub fn value(&self, s: &State) -> Option<u64> {
        const INF: u64 = u64::MAX;
        let t = self.task;
        let mut cost = vec![INF; t.num_atoms()];
        let mut heap = BinaryHeap::new();
        for p in s.bits().ones() {
            cost[p] = 0;
            heap.push(Reverse((0u64, p)));
        }
        let mut missing: Vec<usize> = self
            .actions
            .iter()
            .map(|&a| t.action(a).pre.count_ones())
            .collect();
        let mut sum = vec![0u64; self.actions.len()];

        let relax = |k: usize, c: u64, cost: &mut Vec<u64>, heap: &mut BinaryHeap<Reverse<(u64, usize)>>| {
            for q in t.action(self.actions[k]).add.ones() {
                if c < cost[q] {
                    cost[q] = c;
                    heap.push(Reverse((c, q)));
                }
            }
        };
        for k in 0..self.actions.len() {
            if missing[k] == 0 {
                relax(k, 1, &mut cost, &mut heap);
            }
        }
        while let Some(Reverse((c, p))) = heap.pop() {
            if c > cost[p] {
                continue;
            }
            for &k in &self.watchers[p] {
                missing[k] -= 1;
                sum[k] += c;
                if missing[k] == 0 {
                    relax(k, 1 + sum[k], &mut cost, &mut heap);
                }
            }
        }

        t.goal().ones().try_fold(0u64, |acc, g| {
            (cost[g] != INF).then(|| acc + cost[g])
        })
    }
}

/// `h_add(s)` over the reachable actions, or `None` for infinity.
pub fn h_add(s: &State, t: &GroundTask, r: &ReachableActions) -> Option<u64> {
    HAdd::new(t, r).value(s)
}

impl Heuristic for HAdd<'_> {
    fn name(&self) -> &str {
        "h-add"
    }

    fn evaluate(&self, s: &State) -> f64 {
        self.value(s).map_or(f64::INFINITY, |v| v as f64)
    }
}

/// The learned network, clamped at zero.
pub struct NeuralHeuristic<'a> {
    pub model: &'a HeuristicModel,
    pub name: String,
}

impl<'a> NeuralHeuristic<'a> {
    pub fn new(model: &'a HeuristicModel) -> Self {
        Self {
            model,
            name: "rsl".into(),
        }
    }
}

impl Heuristic for NeuralHeuristic<'_> {
    fn name(&self) -> &str {
        &self.name
    }

    fn evaluate(&self, s: &State) -> f64 {
        self.model
            .heuristic_value(s)
            .expect("model width checked before search")
    }

    fn evaluate_batch(&self, states: &[State]) -> Vec<f64> {
        self.model
            .forward_batch(states)
            .expect("model width checked before search")
            .into_iter()
            .map(|v| v.max(0.0))
            .collect()
    }
}

/// Exact goal distances read from a fully enumerated state space.
pub struct PerfectHeuristic<'a> {
    pub space: &'a StateSpace,
}

impl Heuristic for PerfectHeuristic<'_> {
    fn name(&self) -> &str {
        "perfect"
    }

    fn evaluate(&self, s: &State) -> f64 {
        self.space
            .distance(s)
            .map_or(f64::INFINITY, |d| d as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitset::Bitset;
    use crate::grounding::compute_reachable_actions;
    use crate::strips::GroundAction;

    fn chain() -> GroundTask {
        GroundTask::new(
            vec!["p".into(), "q".into(), "r".into()],
            vec![
                GroundAction::new("pq", 3, [0], [1], [0]),
                GroundAction::new("qr", 3, [1], [2], [1]),
            ],
            Bitset::from_ids(3, [0]),
            Bitset::from_ids(3, [2]),
        )
        .unwrap()
        .0
    }

    #[test]
    fn goal_count_examples() {
        let t = GroundTask::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![],
            Bitset::new(3),
            Bitset::full(3),
        )
        .unwrap()
        .0;
        assert_eq!(goal_count_h(&State(Bitset::new(3)), &t), 3);
        assert_eq!(goal_count_h(&State(Bitset::from_ids(3, [0])), &t), 2);
        assert_eq!(goal_count_h(&State(Bitset::full(3)), &t), 0);
    }

    #[test]
    fn h_add_on_chain() {
        let t = chain();
        let r = compute_reachable_actions(&t);
        assert_eq!(h_add(&State(Bitset::from_ids(3, [0])), &t, &r), Some(2));
        assert_eq!(h_add(&State(Bitset::from_ids(3, [2])), &t, &r), Some(0));
        assert_eq!(h_add(&State(Bitset::new(3)), &t, &r), None);
    }
}
