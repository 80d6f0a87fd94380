//! Grounded STRIPS tasks with progression and regression.

use std::fmt;

use crate::bitset::Bitset;
use crate::error::{Error, Result};

pub type AtomId = usize;
pub type ActionId = usize;

#[derive(Clone, PartialEq, Eq)]
pub struct GroundAction {
    pub name: String,
    pub pre: Bitset,
    pub add: Bitset,
    pub del: Bitset,
}

impl GroundAction {
    /// Builds an action over `num_atoms` atoms. Deletes that are also adds are
    /// dropped from the delete list, which leaves progression unchanged.
    pub fn new(
        name: impl Into<String>,
        num_atoms: usize,
        pre: impl IntoIterator<Item = AtomId>,
        add: impl IntoIterator<Item = AtomId>,
        del: impl IntoIterator<Item = AtomId>,
    ) -> Self {
        let add = Bitset::from_ids(num_atoms, add);
        let mut del = Bitset::from_ids(num_atoms, del);
        del.difference_with(&add);
        Self {
            name: name.into(),
            pre: Bitset::from_ids(num_atoms, pre),
            add,
            del,
        }
    }
}

impl fmt::Debug for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroundAction")
            .field("name", &self.name)
            .field("pre", &self.pre)
            .field("add", &self.add)
            .field("del", &self.del)
            .finish()
    }
}

/// What normalization did to the input when a task was built.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LoadReport {
    /// Names of actions with an empty add list, which were dropped.
    pub dropped_actions: Vec<String>,
    /// Number of actions whose delete list overlapped their add list.
    pub normalized_deletes: usize,
    /// Maps each input action index to its index in the built task.
    pub action_remap: Vec<Option<ActionId>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundTask {
    atoms: Vec<String>,
    actions: Vec<GroundAction>,
    init: Bitset,
    goal: Bitset,
}

impl GroundTask {
    /// Validates and normalizes a task. Actions with empty add lists are
    /// dropped (they can never be regressed through) and `Del := Del \ Add`.
    pub fn new(
        atoms: Vec<String>,
        actions: Vec<GroundAction>,
        init: Bitset,
        goal: Bitset,
    ) -> Result<(Self, LoadReport)> {
        let n = atoms.len();
        let check = |what: &str, set: &Bitset| {
            if set.len() != n {
                Err(Error::Integrity(format!(
                    "{what} has width {} but task has {n} atoms",
                    set.len()
                )))
            } else {
                Ok(())
            }
        };
        check("init", &init)?;
        check("goal", &goal)?;
        if goal.is_empty() {
            return Err(Error::EmptyGoal);
        }

        let mut report = LoadReport::default();
        let mut kept = Vec::with_capacity(actions.len());
        for mut action in actions {
            check(&action.name, &action.pre)?;
            check(&action.name, &action.add)?;
            check(&action.name, &action.del)?;
            if action.add.is_empty() {
                log::warn!("dropping action `{}` with empty add list", action.name);
                report.dropped_actions.push(action.name);
                report.action_remap.push(None);
                continue;
            }
            if action.del.intersects(&action.add) {
                action.del.difference_with(&action.add);
                report.normalized_deletes += 1;
            }
            report.action_remap.push(Some(kept.len()));
            kept.push(action);
        }

        Ok((
            Self {
                atoms,
                actions: kept,
                init,
                goal,
            },
            report,
        ))
    }

    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn atom_name(&self, id: AtomId) -> &str {
        &self.atoms[id]
    }

    pub fn atom_id(&self, name: &str) -> Option<AtomId> {
        self.atoms.iter().position(|a| a == name)
    }

    pub fn actions(&self) -> &[GroundAction] {
        &self.actions
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id]
    }

    pub fn action_id(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a.name == name)
    }

    pub fn init(&self) -> &Bitset {
        &self.init
    }

    pub fn goal(&self) -> &Bitset {
        &self.goal
    }

    pub fn initial_state(&self) -> State {
        State(self.init.clone())
    }

    pub fn goal_preimage(&self) -> PreImage {
        PreImage(self.goal.clone())
    }

    pub fn state_from_names<'a>(&self, names: impl IntoIterator<Item = &'a str>) -> Option<State> {
        let mut bits = Bitset::new(self.num_atoms());
        for name in names {
            bits.insert(self.atom_id(name)?);
        }
        Some(State(bits))
    }

    pub fn describe(&self, set: &Bitset) -> Vec<&str> {
        set.ones().map(|id| self.atom_name(id)).collect()
    }
}

/// A complete truth assignment: atoms not in the set are false.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(pub Bitset);

/// A partial assignment: atoms in the set are true, all others undefined.
/// Denotes the set of states that contain it.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PreImage(pub Bitset);

impl State {
    pub fn bits(&self) -> &Bitset {
        &self.0
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, x: &PreImage) -> bool {
        x.0.is_subset(&self.0)
    }
}

impl PreImage {
    pub fn bits(&self) -> &Bitset {
        &self.0
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "State{:?}", self.0)
    }
}

impl fmt::Debug for PreImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PreImage{:?}", self.0)
    }
}

#[inline]
pub fn is_applicable(s: &State, a: &GroundAction) -> bool {
    a.pre.is_subset(&s.0)
}

/// `(s \ Del(a)) ∪ Add(a)`, failing if `Pre(a) ⊄ s`.
pub fn apply_action(s: &State, a: &GroundAction) -> Result<State> {
    if !is_applicable(s, a) {
        return Err(Error::PreconditionViolated {
            action: a.name.clone(),
        });
    }
    Ok(progress(s, a))
}

/// Progression without the applicability check.
#[inline]
pub fn progress(s: &State, a: &GroundAction) -> State {
    let mut bits = s.0.clone();
    bits.difference_with(&a.del);
    bits.union_with(&a.add);
    State(bits)
}

/// Actions with `Pre(a) ⊆ s`, in declaration order.
pub fn applicable_actions(s: &State, t: &GroundTask) -> Vec<ActionId> {
    t.actions
        .iter()
        .enumerate()
        .filter(|(_, a)| is_applicable(s, a))
        .map(|(i, _)| i)
        .collect()
}

pub fn is_goal(s: &State, t: &GroundTask) -> bool {
    t.goal.is_subset(&s.0)
}

/// `(x \ Add(a)) ∪ Pre(a)`. Relevance and consistency are the caller's job.
pub fn regress(x: &PreImage, a: &GroundAction) -> PreImage {
    let mut bits = x.0.clone();
    bits.difference_with(&a.add);
    bits.union_with(&a.pre);
    PreImage(bits)
}
