//! Pairwise mutexes from h² (atom-pair) reachability.

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::grounding::reachability::ReachableActions;
use crate::strips::{AtomId, GroundTask};

/// Symmetric, irreflexive relation over atoms, stored as one row per atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutexTable {
    rows: Vec<Bitset>,
}

impl MutexTable {
    pub fn empty(num_atoms: usize) -> Self {
        Self {
            rows: vec![Bitset::new(num_atoms); num_atoms],
        }
    }

    /// Builds a table from unordered pairs, rejecting self-pairs and ids out of
    /// range.
    pub fn from_pairs(num_atoms: usize, pairs: impl IntoIterator<Item = (AtomId, AtomId)>) -> Result<Self> {
        let mut table = Self::empty(num_atoms);
        for (p, q) in pairs {
            if p >= num_atoms || q >= num_atoms {
                return Err(Error::Integrity(format!("mutex pair ({p},{q}) out of range")));
            }
            if p == q {
                return Err(Error::Integrity(format!("reflexive mutex pair ({p},{p})")));
            }
            table.insert(p, q);
        }
        Ok(table)
    }

    pub fn insert(&mut self, p: AtomId, q: AtomId) {
        assert_ne!(p, q, "mutex relation is irreflexive");
        self.rows[p].insert(q);
        self.rows[q].insert(p);
    }

    pub fn num_atoms(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn is_mutex(&self, p: AtomId, q: AtomId) -> bool {
        self.rows[p].contains(q)
    }

    /// Atoms mutex with `p`.
    #[inline]
    pub fn row(&self, p: AtomId) -> &Bitset {
        &self.rows[p]
    }

    /// Pairs `(p, q)` with `p < q`, ascending.
    pub fn pairs(&self) -> impl Iterator<Item = (AtomId, AtomId)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(p, row)| row.ones().filter(move |&q| q > p).map(move |q| (p, q)))
    }

    pub fn count(&self) -> usize {
        self.rows.iter().map(Bitset::count_ones).sum::<usize>() / 2
    }

    /// True if some pair of atoms in `set` is mutex.
    pub fn has_mutex_pair(&self, set: &Bitset) -> bool {
        set.ones().any(|p| self.rows[p].intersects(set))
    }
}

/// Marks every atom pair that is not h²-reachable from the initial state as
/// mutex. A pair is reachable if it holds initially, if some pair-applicable
/// action adds both atoms, or if an action adds one of them while the other
/// persists (it is not deleted and is pair-reachable with every
/// precondition). Sound but not complete.
pub fn compute_mutexes(t: &GroundTask, reachable: &ReachableActions) -> MutexTable {
    let n = t.num_atoms();
    // together[p] holds q iff {p, q} is reachable; p ∈ together[p] iff p is.
    let mut together = vec![Bitset::new(n); n];
    let mut atoms = t.init().clone();
    for p in t.init().ones() {
        together[p] = t.init().clone();
    }

    let mut changed = true;
    while changed {
        changed = false;
        for a in reachable.ids() {
            let action = t.action(a);
            if !action.pre.is_subset(&atoms) {
                continue;
            }
            if !action.pre.ones().all(|p| action.pre.is_subset(&together[p])) {
                continue;
            }

            let mut persist = atoms.clone();
            for r in action.pre.ones() {
                persist.intersect_with(&together[r]);
            }
            persist.difference_with(&action.del);
            persist.difference_with(&action.add);

            let mut gained = action.add.clone();
            gained.union_with(&persist);
            for p in action.add.ones() {
                let before = together[p].count_ones();
                together[p].union_with(&gained);
                changed |= together[p].count_ones() != before;
            }
            for q in persist.ones() {
                let before = together[q].count_ones();
                together[q].union_with(&action.add);
                changed |= together[q].count_ones() != before;
            }
            let before = atoms.count_ones();
            atoms.union_with(&action.add);
            changed |= atoms.count_ones() != before;
        }
    }

    let mut table = MutexTable::empty(n);
    for p in 0..n {
        let mut row = Bitset::full(n);
        row.difference_with(&together[p]);
        row.remove(p);
        table.rows[p] = row;
    }
    table
}
