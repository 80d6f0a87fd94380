//! Training-state sampling and goal-distance labels from regression sets.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::grounding::MutexTable;
use crate::regression::{RegressionSet, SelectionMode};
use crate::seed::{rng_for, Rng, Stream};
use crate::strips::{GroundTask, PreImage, State};

pub const DATASET_FORMAT_VERSION: u64 = 1;
pub const TRAIN_FRACTION: f64 = 0.8;

/// Hyper-parameters of one regression + sampling run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RslConfig {
    /// N_r
    pub num_rollouts: usize,
    /// L
    pub length: usize,
    /// N_t
    pub num_states: usize,
    /// P_r, percent of states drawn at random rather than from pre-images.
    pub random_percent: f64,
    pub mode: SelectionMode,
    pub seed: u64,
    /// Probability that an unassigned atom is set true. `None` uses |I|/|F|.
    pub completion_density: Option<f64>,
}

impl Default for RslConfig {
    fn default() -> Self {
        Self {
            num_rollouts: 5,
            length: 500,
            num_states: 100_000,
            random_percent: 50.0,
            mode: SelectionMode::Novelty,
            seed: 0,
            completion_density: None,
        }
    }
}

impl RslConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_rollouts == 0 || self.length == 0 || self.num_states == 0 {
            return Err(Error::InvalidConfig("N_r, L and N_t must be at least 1".into()));
        }
        if !(0.0..=100.0).contains(&self.random_percent) {
            return Err(Error::InvalidConfig(format!(
                "P_r must be within [0, 100], got {}",
                self.random_percent
            )));
        }
        if let Some(d) = self.completion_density {
            if !(0.0..=1.0).contains(&d) {
                return Err(Error::InvalidConfig(format!("completion density {d} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn density_for(&self, t: &GroundTask) -> f64 {
        self.completion_density
            .unwrap_or_else(|| t.init().count_ones() as f64 / t.num_atoms() as f64)
    }

    pub fn num_random(&self) -> usize {
        (self.num_states as f64 * self.random_percent / 100.0).round() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Preimage { rollout: usize, index: usize },
    Random,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Record {
    pub state: State,
    pub label: u32,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingStats {
    pub subset_tests: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub records: Vec<Record>,
    /// `true` for training records, `false` for validation.
    pub train: Vec<bool>,
    pub stats: SamplingStats,
}

impl LabeledDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn split(&self, train: bool) -> impl Iterator<Item = &Record> {
        self.records
            .iter()
            .zip(&self.train)
            .filter(move |(_, &t)| t == train)
            .map(|(r, _)| r)
    }

    /// Builds a dataset from records and assigns the seeded 80/20 split.
    pub fn with_split(records: Vec<Record>, seed: u64) -> Self {
        let train = split_flags(records.len(), seed);
        Self {
            records,
            train,
            stats: SamplingStats::default(),
        }
    }
}

/// Shuffles record indices and marks the first ⌈0.8·n⌉ as training.
pub fn split_flags(n: usize, seed: u64) -> Vec<bool> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng_for(seed, Stream::Split, 0));
    let cut = (n as f64 * TRAIN_FRACTION).ceil() as usize;
    let mut flags = vec![false; n];
    for &i in &order[..cut] {
        flags[i] = true;
    }
    flags
}

/// Removes atoms until no mutex pair remains. Pairs are visited in ascending
/// `(p, q)` order; an atom of `x` is never removed, and when neither atom is
/// in `x` a fair coin picks the victim.
pub fn repair_mutexes(s: &State, x: &PreImage, m: &MutexTable, rng: &mut Rng) -> State {
    let mut bits = s.0.clone();
    for p in 0..bits.len() {
        if !bits.contains(p) {
            continue;
        }
        let conflicts = m.row(p).intersection(&bits);
        for q in conflicts.ones().filter(|&q| q > p) {
            if !bits.contains(p) {
                break;
            }
            if !bits.contains(q) {
                continue;
            }
            let victim = match (x.0.contains(p), x.0.contains(q)) {
                (true, _) => q,
                (false, true) => p,
                (false, false) => {
                    if rng.gen_bool(0.5) {
                        p
                    } else {
                        q
                    }
                }
            };
            bits.remove(victim);
        }
    }
    debug_assert!(!m.has_mutex_pair(&bits));
    State(bits)
}

/// Samples a state from the set denoted by `x`: unassigned atoms are true
/// with probability `density`, then mutexes are repaired around `x`.
pub fn complete_preimage(x: &PreImage, t: &GroundTask, m: &MutexTable, rng: &mut Rng, density: f64) -> State {
    let mut bits = x.0.clone();
    for p in 0..t.num_atoms() {
        if !bits.contains(p) && rng.gen_bool(density) {
            bits.insert(p);
        }
    }
    repair_mutexes(&State(bits), x, m, rng)
}

/// Smallest `i` such that some rollout's `x_i ⊆ s`, or `L + 1`.
pub fn label_state(s: &State, regressions: &RegressionSet) -> u32 {
    label_state_counted(s, regressions, &mut 0)
}

pub fn label_state_counted(s: &State, regressions: &RegressionSet, subset_tests: &mut u64) -> u32 {
    let mut best = regressions.length + 1;
    for rollout in &regressions.rollouts {
        for (i, x) in rollout.preimages.iter().enumerate().take(best) {
            *subset_tests += 1;
            if s.contains(x) {
                best = i;
                break;
            }
        }
    }
    best as u32
}

/// Draws `round(N_t·P_r/100)` random states and fills the rest from non-root
/// pre-images chosen uniformly with replacement, labels every record and
/// assigns the 80/20 split.
pub fn sample_states(
    regressions: &RegressionSet,
    t: &GroundTask,
    m: &MutexTable,
    cfg: &RslConfig,
) -> Result<LabeledDataset> {
    cfg.validate()?;
    if regressions.rollouts.is_empty() {
        return Err(Error::InvalidConfig("regression set is empty".into()));
    }
    let density = cfg.density_for(t);
    let n_rand = cfg.num_random();
    let mut rng = rng_for(cfg.seed, Stream::Sampling, 0);

    let mut pool: Vec<(usize, usize)> = regressions
        .rollouts
        .iter()
        .enumerate()
        .flat_map(|(j, r)| (1..r.preimages.len()).map(move |i| (j, i)))
        .collect();
    if pool.is_empty() {
        // Every rollout died at the goal; fall back to the root pre-images.
        pool = (0..regressions.rollouts.len()).map(|j| (j, 0)).collect();
    }

    let empty = PreImage(Bitset::new(t.num_atoms()));
    let mut stats = SamplingStats::default();
    let mut records = Vec::with_capacity(cfg.num_states);
    for k in 0..cfg.num_states {
        let (state, provenance) = if k < n_rand {
            (complete_preimage(&empty, t, m, &mut rng, density), Provenance::Random)
        } else {
            let (j, i) = pool[rng.gen_range(0..pool.len())];
            let x = &regressions.rollouts[j].preimages[i];
            (
                complete_preimage(x, t, m, &mut rng, density),
                Provenance::Preimage { rollout: j, index: i },
            )
        };
        let label = label_state_counted(&state, regressions, &mut stats.subset_tests);
        records.push(Record { state, label, provenance });
    }

    let mut ds = LabeledDataset::with_split(records, cfg.seed);
    ds.stats = stats;
    Ok(ds)
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetSidecar {
    pub format_version: u64,
    pub task_sha256: String,
    pub config: RslConfig,
    pub split: Vec<SplitTag>,
    pub provenance: Vec<Provenance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitTag {
    Train,
    Validation,
}

/// CSV body: `label,bits` with hex bits, atom 0 in the low bit of byte 0.
pub fn dataset_csv(ds: &LabeledDataset) -> String {
    let mut out = String::from("label,bits\n");
    for r in &ds.records {
        let _ = writeln!(out, "{},{}", r.label, hex::encode(r.state.0.to_bytes()));
    }
    out
}

pub fn write_dataset(
    ds: &LabeledDataset,
    task_sha256: &str,
    cfg: &RslConfig,
    csv_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
) -> Result<()> {
    fs::write(csv_path, dataset_csv(ds))?;
    let sidecar = DatasetSidecar {
        format_version: DATASET_FORMAT_VERSION,
        task_sha256: task_sha256.to_string(),
        config: cfg.clone(),
        split: ds
            .train
            .iter()
            .map(|&t| if t { SplitTag::Train } else { SplitTag::Validation })
            .collect(),
        provenance: ds.records.iter().map(|r| r.provenance).collect(),
    };
    fs::write(sidecar_path, serde_json::to_vec(&sidecar)?)?;
    Ok(())
}

pub fn read_dataset(
    num_atoms: usize,
    csv_path: impl AsRef<Path>,
    sidecar_path: impl AsRef<Path>,
) -> Result<(LabeledDataset, DatasetSidecar)> {
    let sidecar: DatasetSidecar = serde_json::from_slice(&fs::read(sidecar_path)?)?;
    if sidecar.format_version != DATASET_FORMAT_VERSION {
        return Err(Error::FormatVersion {
            found: sidecar.format_version,
            expected: DATASET_FORMAT_VERSION,
        });
    }
    let text = fs::read_to_string(csv_path)?;
    let mut lines = text.lines();
    if lines.next() != Some("label,bits") {
        return Err(Error::Integrity("dataset header must be `label,bits`".into()));
    }
    let mut records = Vec::new();
    for (n, line) in lines.enumerate() {
        let bad = || Error::Integrity(format!("malformed dataset row {}", n + 1));
        let (label, bits) = line.split_once(',').ok_or_else(bad)?;
        let label: u32 = label.parse().map_err(|_| bad())?;
        let bytes = hex::decode(bits).map_err(|_| bad())?;
        let bits = Bitset::from_bytes(num_atoms, &bytes).ok_or_else(bad)?;
        let provenance = *sidecar.provenance.get(n).ok_or_else(bad)?;
        records.push(Record {
            state: State(bits),
            label,
            provenance,
        });
    }
    if records.len() != sidecar.split.len() {
        return Err(Error::Integrity("split length differs from record count".into()));
    }
    let train = sidecar.split.iter().map(|s| *s == SplitTag::Train).collect();
    Ok((
        LabeledDataset {
            records,
            train,
            stats: SamplingStats::default(),
        },
        sidecar,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::Rollout;
    use rand::SeedableRng;

    fn set(n: usize, ids: &[usize]) -> Bitset {
        Bitset::from_ids(n, ids.iter().copied())
    }

    #[test]
    fn repair_keeps_preimage_atoms() {
        let m = MutexTable::from_pairs(2, [(0, 1)]).unwrap();
        let mut rng = Rng::seed_from_u64(0);
        let s = State(set(2, &[0, 1]));
        assert_eq!(repair_mutexes(&s, &PreImage(set(2, &[0])), &m, &mut rng), State(set(2, &[0])));
        assert_eq!(repair_mutexes(&s, &PreImage(set(2, &[1])), &m, &mut rng), State(set(2, &[1])));
    }

    #[test]
    fn repair_identity_when_clean() {
        let m = MutexTable::from_pairs(3, [(0, 1)]).unwrap();
        let mut rng = Rng::seed_from_u64(0);
        let s = State(set(3, &[0, 2]));
        assert_eq!(repair_mutexes(&s, &PreImage(Bitset::new(3)), &m, &mut rng), s);
    }

    #[test]
    fn repair_coin_is_fair() {
        let m = MutexTable::from_pairs(2, [(0, 1)]).unwrap();
        let s = State(set(2, &[0, 1]));
        let x = PreImage(Bitset::new(2));
        let mut kept_p = 0;
        for seed in 0..10_000u64 {
            let mut rng = Rng::seed_from_u64(seed);
            let out = repair_mutexes(&s, &x, &m, &mut rng);
            assert_eq!(out.0.count_ones(), 1);
            kept_p += out.0.contains(0) as usize;
        }
        let frac = kept_p as f64 / 10_000.0;
        assert!((frac - 0.5).abs() <= 0.02, "{frac}");
    }

    fn task3() -> GroundTask {
        GroundTask::new(
            vec!["p".into(), "q".into(), "r".into()],
            vec![],
            set(3, &[0]),
            set(3, &[2]),
        )
        .unwrap()
        .0
    }

    #[test]
    fn completion_density_extremes() {
        let t = task3();
        let mut rng = Rng::seed_from_u64(5);
        let x = PreImage(set(3, &[1]));
        let empty = MutexTable::empty(3);
        assert_eq!(complete_preimage(&x, &t, &empty, &mut rng, 0.0), State(set(3, &[1])));
        assert_eq!(complete_preimage(&x, &t, &empty, &mut rng, 1.0), State(Bitset::full(3)));
        let m = MutexTable::from_pairs(3, [(0, 1)]).unwrap();
        for _ in 0..200 {
            let s = complete_preimage(&x, &t, &m, &mut rng, 0.5);
            assert!(s.0.contains(1) && !s.0.contains(0));
        }
    }

    fn rollout(ids: &[&[usize]]) -> Rollout {
        Rollout {
            preimages: ids.iter().map(|x| PreImage(set(6, x))).collect(),
            actions: vec![0; ids.len() - 1],
            terminated_early: false,
        }
    }

    fn regressions() -> RegressionSet {
        RegressionSet {
            rollouts: vec![
                rollout(&[&[5], &[4], &[3], &[0, 1], &[2], &[0]]),
                rollout(&[&[5], &[4, 1], &[3, 1], &[2, 1], &[1, 3], &[0, 2]]),
            ],
            num_rollouts: 2,
            length: 5,
            mode: SelectionMode::Random,
            stats: Default::default(),
        }
    }

    #[test]
    fn labels_take_the_minimum() {
        let r = regressions();
        assert_eq!(label_state(&State(set(6, &[5, 0])), &r), 0);
        // x_3 of rollout 0 and x_5 of rollout 1.
        assert_eq!(label_state(&State(set(6, &[0, 1])), &r), 3);
        assert_eq!(label_state(&State(set(6, &[0, 2])), &r), 4);
        assert_eq!(label_state(&State(Bitset::new(6)), &r), 6);
    }

    #[test]
    fn config_validation() {
        let cfg = RslConfig { random_percent: 150.0, ..RslConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = RslConfig { num_states: 100_000, random_percent: 50.0, ..RslConfig::default() };
        assert_eq!(cfg.num_random(), 50_000);
    }

    #[test]
    fn split_sizes() {
        for n in [1usize, 2, 5, 10, 101] {
            let flags = split_flags(n, 3);
            let train = flags.iter().filter(|&&f| f).count();
            assert_eq!(train, (n as f64 * 0.8).ceil() as usize);
        }
    }
}
