//! Goal regression rollouts, optionally guided by precondition novelty.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::grounding::{MutexTable, ReachableActions};
use crate::seed::{rng_for, Rng, Stream};
use crate::strips::{regress, ActionId, GroundAction, GroundTask, PreImage};

/// How a rollout picks among valid regression actions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SelectionMode {
    /// Uniform over valid actions.
    Random,
    /// Uniform over the actions maximizing μ⁺.
    Novelty,
}

impl fmt::Display for SelectionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SelectionMode::Random => "random",
            SelectionMode::Novelty => "novelty",
        })
    }
}

impl FromStr for SelectionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(SelectionMode::Random),
            "novelty" => Ok(SelectionMode::Novelty),
            other => Err(Error::InvalidConfig(format!("unknown mode `{other}`"))),
        }
    }
}

/// `{ q ∈ F \ Add(a) | ∃ p ∈ Pre(a): MUTEX(p, q) }`
pub fn e_del(a: &GroundAction, m: &MutexTable) -> Bitset {
    let mut out = Bitset::new(a.add.len());
    for p in a.pre.ones() {
        out.union_with(m.row(p));
    }
    out.difference_with(&a.add);
    out
}

/// `|Pre(a) \ traj_union|`: preconditions not yet asserted anywhere in the
/// current trajectory.
#[inline]
pub fn novelty_mu_plus(a: &GroundAction, traj_union: &Bitset) -> usize {
    a.pre.difference_count(traj_union)
}

/// Precomputed indices shared by every rollout over one task.
pub struct RegressionContext<'a> {
    task: &'a GroundTask,
    mutexes: &'a MutexTable,
    e_del: Vec<Bitset>,
    /// Reachable actions adding each atom, ascending.
    achievers: Vec<Vec<ActionId>>,
}

impl<'a> RegressionContext<'a> {
    pub fn new(task: &'a GroundTask, reachable: &ReachableActions, mutexes: &'a MutexTable) -> Self {
        let mut achievers = vec![Vec::new(); task.num_atoms()];
        for a in reachable.ids() {
            for p in task.action(a).add.ones() {
                achievers[p].push(a);
            }
        }
        Self {
            task,
            mutexes,
            e_del: task.actions().iter().map(|a| e_del(a, mutexes)).collect(),
            achievers,
        }
    }

    pub fn task(&self) -> &GroundTask {
        self.task
    }

    pub fn mutexes(&self) -> &MutexTable {
        self.mutexes
    }

    /// Valid regression actions for `x` in ascending id order. `examined`
    /// is bumped once per distinct candidate looked at.
    pub fn valid_actions(&self, x: &PreImage, examined: &mut u64) -> Vec<ActionId> {
        let mut seen = Bitset::new(self.task.num_actions());
        for p in x.0.ones() {
            for &a in &self.achievers[p] {
                seen.insert(a);
            }
        }
        *examined += seen.count_ones() as u64;
        seen.ones().filter(|&a| self.is_valid(x, a)).collect()
    }

    fn is_valid(&self, x: &PreImage, a: ActionId) -> bool {
        let action = self.task.action(a);
        if x.0.intersects(&self.e_del[a]) || x.0.intersects(&action.del) {
            return false;
        }
        !self.mutexes.has_mutex_pair(&regress(x, action).0)
    }
}

/// Actions `a` with `a` reachable, `x ∩ e-Del(a) = ∅`, `x ∩ Del(a) = ∅`,
/// `x ∩ Add(a) ≠ ∅`, and whose pre-image carries no mutex pair.
pub fn valid_regression_actions(
    x: &PreImage,
    t: &GroundTask,
    r: &ReachableActions,
    m: &MutexTable,
) -> Vec<ActionId> {
    RegressionContext::new(t, r, m).valid_actions(x, &mut 0)
}

pub fn select_action(
    task: &GroundTask,
    traj_union: &Bitset,
    candidates: &[ActionId],
    mode: SelectionMode,
    rng: &mut Rng,
) -> Result<ActionId> {
    if candidates.is_empty() {
        return Err(Error::EmptyCandidates);
    }
    let pool: Vec<ActionId> = match mode {
        SelectionMode::Random => candidates.to_vec(),
        SelectionMode::Novelty => {
            let scores: Vec<usize> = candidates
                .iter()
                .map(|&a| novelty_mu_plus(task.action(a), traj_union))
                .collect();
            let best = *scores.iter().max().expect("nonempty");
            candidates
                .iter()
                .zip(&scores)
                .filter(|(_, &s)| s == best)
                .map(|(&a, _)| a)
                .collect()
        }
    };
    Ok(pool[rng.gen_range(0..pool.len())])
}

/// One regression trajectory from the goal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rollout {
    /// `x_0 = G, x_1, …`
    pub preimages: Vec<PreImage>,
    /// `actions[i]` regresses `preimages[i]` into `preimages[i + 1]`.
    pub actions: Vec<ActionId>,
    pub terminated_early: bool,
}

impl Rollout {
    /// Union of every atom asserted along the rollout.
    pub fn atom_union(&self) -> Bitset {
        let mut u = self.preimages[0].0.clone();
        for x in &self.preimages[1..] {
            u.union_with(&x.0);
        }
        u
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegressionStats {
    /// Candidate actions looked at across all steps; bounded by `N_r·L·|O|`.
    pub candidates_examined: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegressionSet {
    pub rollouts: Vec<Rollout>,
    pub num_rollouts: usize,
    pub length: usize,
    pub mode: SelectionMode,
    pub stats: RegressionStats,
}

pub fn rollout(ctx: &RegressionContext<'_>, length: usize, mode: SelectionMode, rng: &mut Rng, stats: &mut RegressionStats) -> Rollout {
    assert!(length >= 1, "rollout length must be at least 1");
    let mut x = ctx.task.goal_preimage();
    let mut union = x.0.clone();
    let mut out = Rollout {
        preimages: vec![x.clone()],
        actions: Vec::with_capacity(length),
        terminated_early: false,
    };
    for _ in 0..length {
        let candidates = ctx.valid_actions(&x, &mut stats.candidates_examined);
        if candidates.is_empty() {
            out.terminated_early = true;
            break;
        }
        let a = select_action(ctx.task, &union, &candidates, mode, rng).expect("nonempty candidates");
        x = regress(&x, ctx.task.action(a));
        union.union_with(&x.0);
        out.actions.push(a);
        out.preimages.push(x.clone());
    }
    out
}

/// `num_rollouts` independent rollouts; rollout `j` draws from the stream
/// derived from `(seed, j)`.
pub fn run_regressions(
    ctx: &RegressionContext<'_>,
    num_rollouts: usize,
    length: usize,
    mode: SelectionMode,
    seed: u64,
) -> Result<RegressionSet> {
    if num_rollouts == 0 || length == 0 {
        return Err(Error::InvalidConfig("N_r and L must be at least 1".into()));
    }
    let mut stats = RegressionStats::default();
    let rollouts = (0..num_rollouts)
        .map(|j| {
            let mut rng = rng_for(seed, Stream::Rollout, j as u64);
            rollout(ctx, length, mode, &mut rng, &mut stats)
        })
        .collect();
    Ok(RegressionSet {
        rollouts,
        num_rollouts,
        length,
        mode,
        stats,
    })
}

#[derive(Serialize)]
struct RolloutRecord {
    preimages: Vec<Vec<usize>>,
    actions: Vec<ActionId>,
    terminated_early: bool,
}

impl RegressionSet {
    /// Rollout dump: `[{"preimages": [[ids]..], "actions": [ids], "terminated_early": b}, ..]`.
    pub fn to_json_bytes(&self) -> Vec<u8> {
        let records: Vec<RolloutRecord> = self
            .rollouts
            .iter()
            .map(|r| RolloutRecord {
                preimages: r.preimages.iter().map(|x| x.0.to_vec()).collect(),
                actions: r.actions.clone(),
                terminated_early: r.terminated_early,
            })
            .collect();
        serde_json::to_vec(&records).expect("rollouts serialize")
    }

    /// Number of non-root pre-images over all rollouts.
    pub fn num_nonroot(&self) -> usize {
        self.rollouts.iter().map(|r| r.preimages.len() - 1).sum()
    }
}
