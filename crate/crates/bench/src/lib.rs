//! Shared workloads for the criterion benchmarks.

use rsl_core::fixtures::blocksworld;
use rsl_core::search::random_walk_states;
use rsl_core::seed::{rng_for, Stream};
use rsl_core::{GroundBundle, State};

/// A grounded blocksworld task plus a fixed set of random-walk states.
pub struct Workload {
    pub bundle: GroundBundle,
    pub states: Vec<State>,
}

impl Workload {
    pub fn blocksworld(blocks: usize, num_states: usize) -> Self {
        let bundle = blocksworld(blocks);
        let mut rng = rng_for(blocks as u64, Stream::EvalStates, 0);
        let states = random_walk_states(&bundle.task, num_states, 100, &mut rng);
        Self { bundle, states }
    }

    pub fn num_atoms(&self) -> usize {
        self.bundle.task.num_atoms()
    }
}
