//! Delete-relaxation reachability from the initial state.

use crate::bitset::Bitset;
use crate::strips::{ActionId, GroundTask};

/// Actions whose preconditions are reachable when delete lists are ignored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachableActions(pub Bitset);

impl ReachableActions {
    pub fn all(t: &GroundTask) -> Self {
        Self(Bitset::full(t.num_actions()))
    }

    pub fn contains(&self, a: ActionId) -> bool {
        self.0.contains(a)
    }

    pub fn len(&self) -> usize {
        self.0.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ActionId> + '_ {
        self.0.ones()
    }
}

/// Least fixpoint of relaxed reachability, computed with per-action
/// unsatisfied-precondition counters. Also returns the reachable atoms.
pub fn relaxed_reachability(t: &GroundTask, from: &Bitset) -> (Bitset, Bitset) {
    let n = t.num_atoms();
    let mut watchers: Vec<Vec<ActionId>> = vec![Vec::new(); n];
    let mut missing: Vec<usize> = Vec::with_capacity(t.num_actions());
    for (i, a) in t.actions().iter().enumerate() {
        missing.push(a.pre.count_ones());
        for p in a.pre.ones() {
            watchers[p].push(i);
        }
    }

    let mut atoms = Bitset::new(n);
    let mut actions = Bitset::new(t.num_actions());
    let mut queue: Vec<usize> = Vec::new();
    for p in from.ones() {
        atoms.insert(p);
        queue.push(p);
    }
    let fire = |a: ActionId, atoms: &mut Bitset, queue: &mut Vec<usize>, actions: &mut Bitset| {
        actions.insert(a);
        for q in t.action(a).add.ones() {
            if atoms.insert(q) {
                queue.push(q);
            }
        }
    };
    for (a, &m) in missing.iter().enumerate() {
        if m == 0 {
            fire(a, &mut atoms, &mut queue, &mut actions);
        }
    }
    while let Some(p) = queue.pop() {
        for &a in &watchers[p] {
            missing[a] -= 1;
            if missing[a] == 0 {
                fire(a, &mut atoms, &mut queue, &mut actions);
            }
        }
    }
    (atoms, actions)
}

pub fn compute_reachable_actions(t: &GroundTask) -> ReachableActions {
    ReachableActions(relaxed_reachability(t, t.init()).1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::strips::GroundAction;

    fn chain() -> GroundTask {
        // p -> q -> r, plus an action needing z which nothing adds.
        let atoms = ["p", "q", "r", "z"].map(String::from).to_vec();
        GroundTask::new(
            atoms,
            vec![
                GroundAction::new("pq", 4, [0], [1], [0]),
                GroundAction::new("qr", 4, [1], [2], [1]),
                GroundAction::new("zr", 4, [3], [2], []),
            ],
            Bitset::from_ids(4, [0]),
            Bitset::from_ids(4, [2]),
        )
        .unwrap()
        .0
    }

    #[test]
    fn chain_reachability() {
        let r = compute_reachable_actions(&chain());
        assert_eq!(r.ids().collect::<Vec<_>>(), vec![0, 1]);
    }

    #[test]
    fn everything_reachable_when_preconditions_hold_initially() {
        let atoms = ["p", "q"].map(String::from).to_vec();
        let t = GroundTask::new(
            atoms,
            vec![
                GroundAction::new("a", 2, [0], [1], []),
                GroundAction::new("b", 2, [], [0], []),
            ],
            Bitset::from_ids(2, [0]),
            Bitset::from_ids(2, [1]),
        )
        .unwrap()
        .0;
        assert_eq!(compute_reachable_actions(&t), ReachableActions::all(&t));
    }
}
