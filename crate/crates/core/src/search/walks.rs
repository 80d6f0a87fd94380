//! Random-walk generation of evaluation start states.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::strips::{applicable_actions, progress, ActionId, GroundTask, State};

/// One walk of `steps` uniform choices from the initial state. A walk that
/// hits a dead end stays there; the returned action list is then shorter
/// than `steps`.
pub fn random_walk<R: Rng + ?Sized>(t: &GroundTask, steps: usize, rng: &mut R) -> (State, Vec<ActionId>) {
    let mut s = t.initial_state();
    let mut taken = Vec::with_capacity(steps);
    for _ in 0..steps {
        let app = applicable_actions(&s, t);
        let Some(&a) = app.choose(rng) else { break };
        s = progress(&s, t.action(a));
        taken.push(a);
    }
    (s, taken)
}

pub fn random_walk_states<R: Rng + ?Sized>(t: &GroundTask, n: usize, steps: usize, rng: &mut R) -> Vec<State> {
    (0..n).map(|_| random_walk(t, steps, rng).0).collect()
}
