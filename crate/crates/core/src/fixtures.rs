//! Small bundled planning tasks and generators used by tests, benches and
//! the command-line smoke runs.

use std::fmt::Write as _;

use rand::seq::index::sample;
use rand::Rng;

use crate::bitset::Bitset;
use crate::grounding::{ground_pddl, GroundBundle};
use crate::strips::{GroundAction, GroundTask};

pub const BLOCKSWORLD_DOMAIN: &str = include_str!("../fixtures/blocksworld-domain.pddl");
pub const GRIPPER_DOMAIN: &str = include_str!("../fixtures/gripper-domain.pddl");
pub const CHAIN_DOMAIN: &str = include_str!("../fixtures/chain-domain.pddl");
/// Declares `:conditional-effects`, so it must be rejected.
pub const ADL_DOMAIN: &str = include_str!("../fixtures/adl-domain.pddl");

#[derive(Clone, Copy, Debug)]
pub struct Fixture {
    pub name: &'static str,
    pub domain: &'static str,
    pub problem: &'static str,
}

impl Fixture {
    pub fn ground(&self) -> GroundBundle {
        ground_pddl(self.domain, self.problem)
            .unwrap_or_else(|e| panic!("fixture {} failed to ground: {e}", self.name))
            .0
    }
}

pub const BLOCKSWORLD_3: Fixture = Fixture {
    name: "blocksworld-3",
    domain: BLOCKSWORLD_DOMAIN,
    problem: include_str!("../fixtures/blocksworld-3.pddl"),
};

pub const BLOCKSWORLD_4: Fixture = Fixture {
    name: "blocksworld-4",
    domain: BLOCKSWORLD_DOMAIN,
    problem: include_str!("../fixtures/blocksworld-4.pddl"),
};

pub const GRIPPER_2: Fixture = Fixture {
    name: "gripper-2",
    domain: GRIPPER_DOMAIN,
    problem: include_str!("../fixtures/gripper-2.pddl"),
};

pub const CHAIN_5: Fixture = Fixture {
    name: "chain-5",
    domain: CHAIN_DOMAIN,
    problem: include_str!("../fixtures/chain-5.pddl"),
};

pub const ALL: [Fixture; 4] = [BLOCKSWORLD_3, BLOCKSWORLD_4, GRIPPER_2, CHAIN_5];

/// An `n`-block problem: all blocks start on the table and the goal is the
/// tower `b1` on `b2` on ... on `bn`.
pub fn blocksworld_problem(n: usize) -> String {
    assert!(n >= 2, "need at least two blocks for a tower goal");
    let blocks: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
    let mut p = format!("(define (problem bw-{n})\n  (:domain blocksworld)\n  (:objects {} - block)\n  (:init (handempty)", blocks.join(" "));
    for b in &blocks {
        write!(p, " (ontable {b}) (clear {b})").unwrap();
    }
    p.push_str(")\n  (:goal (and");
    for w in blocks.windows(2) {
        write!(p, " (on {} {})", w[0], w[1]).unwrap();
    }
    p.push_str(")))\n");
    p
}

pub fn blocksworld(n: usize) -> GroundBundle {
    ground_pddl(BLOCKSWORLD_DOMAIN, &blocksworld_problem(n))
        .expect("generated blocksworld problem grounds")
        .0
}

/// A random STRIPS task. Every action has a non-empty add list and the goal
/// is non-empty; nothing guarantees solvability.
pub fn random_task<R: Rng + ?Sized>(rng: &mut R, num_atoms: usize, num_actions: usize) -> GroundTask {
    assert!(num_atoms >= 2);
    let subset = |rng: &mut R, lo: usize, hi: usize| -> Vec<usize> {
        let k = rng.gen_range(lo..=hi.min(num_atoms));
        sample(rng, num_atoms, k).into_vec()
    };
    let actions = (0..num_actions)
        .map(|i| {
            let pre = subset(rng, 0, 3);
            let add = subset(rng, 1, 2);
            let del = subset(rng, 0, 2);
            GroundAction::new(format!("a{i}"), num_atoms, pre, add, del)
        })
        .collect();
    let init = Bitset::from_ids(num_atoms, subset(rng, 1, num_atoms / 2 + 1));
    let goal = Bitset::from_ids(num_atoms, subset(rng, 1, 3));
    GroundTask::new(
        (0..num_atoms).map(|i| format!("p{i}")).collect(),
        actions,
        init,
        goal,
    )
    .expect("random task is well formed")
    .0
}
