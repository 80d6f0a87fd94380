//! Exact goal distances by breadth-first search over progression.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::strips::{applicable_actions, is_goal, progress, GroundTask, State};

pub const DEFAULT_STATE_CAP: usize = 1_000_000;

/// Length of a shortest plan from `s`, `None` if the goal is unreachable.
/// Fails once more than `cap` states have been generated.
pub fn exact_distance(t: &GroundTask, s: &State, cap: usize) -> Result<Option<usize>> {
    if is_goal(s, t) {
        return Ok(Some(0));
    }
    let mut depth: HashMap<State, usize> = HashMap::new();
    let mut queue = VecDeque::new();
    depth.insert(s.clone(), 0);
    queue.push_back(s.clone());
    while let Some(cur) = queue.pop_front() {
        let d = depth[&cur];
        for a in applicable_actions(&cur, t) {
            let next = progress(&cur, t.action(a));
            if depth.contains_key(&next) {
                continue;
            }
            if is_goal(&next, t) {
                return Ok(Some(d + 1));
            }
            if depth.len() >= cap {
                return Err(Error::StateSpaceCap(cap));
            }
            depth.insert(next.clone(), d + 1);
            queue.push_back(next);
        }
    }
    Ok(None)
}

/// Every state reachable from a root, with exact goal distances.
pub struct StateSpace {
    states: Vec<State>,
    index: HashMap<State, usize>,
    distance: Vec<Option<usize>>,
}

impl StateSpace {
    pub fn explore(t: &GroundTask, root: &State, cap: usize) -> Result<Self> {
        let mut states = vec![root.clone()];
        let mut index = HashMap::from([(root.clone(), 0usize)]);
        let mut preds: Vec<Vec<usize>> = vec![Vec::new()];
        let mut head = 0;
        while head < states.len() {
            let cur = states[head].clone();
            for a in applicable_actions(&cur, t) {
                let next = progress(&cur, t.action(a));
                let id = match index.get(&next) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= cap {
                            return Err(Error::StateSpaceCap(cap));
                        }
                        let id = states.len();
                        index.insert(next.clone(), id);
                        states.push(next);
                        preds.push(Vec::new());
                        id
                    }
                };
                preds[id].push(head);
            }
            head += 1;
        }

        let mut distance = vec![None; states.len()];
        let mut queue = VecDeque::new();
        for (i, s) in states.iter().enumerate() {
            if is_goal(s, t) {
                distance[i] = Some(0);
                queue.push_back(i);
            }
        }
        while let Some(i) = queue.pop_front() {
            let d = distance[i].expect("queued states have distances");
            for &p in &preds[i] {
                if distance[p].is_none() {
                    distance[p] = Some(d + 1);
                    queue.push_back(p);
                }
            }
        }
        Ok(Self { states, index, distance })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[State] {
        &self.states
    }

    pub fn contains(&self, s: &State) -> bool {
        self.index.contains_key(s)
    }

    /// Goal distance of a state in the space; `None` if unknown or infinite.
    pub fn distance(&self, s: &State) -> Option<usize> {
        self.index.get(s).and_then(|&i| self.distance[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bitset::Bitset;
    use crate::strips::GroundAction;

    fn chain(n: usize) -> GroundTask {
        GroundTask::new(
            (0..n).map(|i| format!("c{i}")).collect(),
            (0..n - 1)
                .map(|i| GroundAction::new(format!("s{i}"), n, [i], [i + 1], [i]))
                .collect(),
            Bitset::from_ids(n, [0]),
            Bitset::from_ids(n, [n - 1]),
        )
        .unwrap()
        .0
    }

    #[test]
    fn chain_distances() {
        let t = chain(4);
        assert_eq!(exact_distance(&t, &t.initial_state(), 100).unwrap(), Some(3));
        let goal = State(Bitset::from_ids(4, [3]));
        assert_eq!(exact_distance(&t, &goal, 100).unwrap(), Some(0));
        let dead = State(Bitset::new(4));
        assert_eq!(exact_distance(&t, &dead, 100).unwrap(), None);
    }

    #[test]
    fn cap_is_an_error() {
        let t = chain(6);
        assert!(matches!(
            exact_distance(&t, &t.initial_state(), 2),
            Err(Error::StateSpaceCap(2))
        ));
    }

    #[test]
    fn space_agrees_with_bfs() {
        let t = chain(5);
        let space = StateSpace::explore(&t, &t.initial_state(), 100).unwrap();
        assert_eq!(space.len(), 5);
        for s in space.states() {
            assert_eq!(space.distance(s), exact_distance(&t, s, 100).unwrap());
        }
    }
}
