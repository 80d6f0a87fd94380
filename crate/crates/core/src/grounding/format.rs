//! Grounded task JSON interchange.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::grounding::mutex::MutexTable;
use crate::grounding::reachability::ReachableActions;
use crate::strips::{GroundAction, GroundTask};

pub const GROUND_FORMAT_VERSION: u64 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ActionRecord {
    name: String,
    pre: Vec<usize>,
    add: Vec<usize>,
    del: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GroundTaskFile {
    format_version: u64,
    atoms: Vec<String>,
    actions: Vec<ActionRecord>,
    init: Vec<usize>,
    goal: Vec<usize>,
    mutexes: Vec<[usize; 2]>,
    reachable_actions: Vec<usize>,
}

/// A grounded task bundled with its mutexes and reachable actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroundBundle {
    pub task: GroundTask,
    pub mutexes: MutexTable,
    pub reachable: ReachableActions,
}

pub fn to_json_bytes(t: &GroundTask, mutexes: &MutexTable, reachable: &ReachableActions) -> Vec<u8> {
    let file = GroundTaskFile {
        format_version: GROUND_FORMAT_VERSION,
        atoms: t.atoms().to_vec(),
        actions: t
            .actions()
            .iter()
            .map(|a| ActionRecord {
                name: a.name.clone(),
                pre: a.pre.to_vec(),
                add: a.add.to_vec(),
                del: a.del.to_vec(),
            })
            .collect(),
        init: t.init().to_vec(),
        goal: t.goal().to_vec(),
        mutexes: mutexes.pairs().map(|(p, q)| [p, q]).collect(),
        reachable_actions: reachable.ids().collect(),
    };
    serde_json::to_vec(&file).expect("ground task serializes")
}

fn ids_to_set(n: usize, ids: &[usize], what: &str) -> Result<Bitset> {
    if let Some(bad) = ids.iter().find(|&&i| i >= n) {
        return Err(Error::Integrity(format!("{what} references id {bad}, limit is {n}")));
    }
    Ok(Bitset::from_ids(n, ids.iter().copied()))
}

pub fn from_json_bytes(bytes: &[u8]) -> Result<GroundBundle> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    let version = value
        .get("format_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Integrity("missing numeric format_version".into()))?;
    if version != GROUND_FORMAT_VERSION {
        return Err(Error::FormatVersion {
            found: version,
            expected: GROUND_FORMAT_VERSION,
        });
    }
    let file: GroundTaskFile = serde_json::from_value(value)?;
    let n = file.atoms.len();

    let mut actions = Vec::with_capacity(file.actions.len());
    for rec in &file.actions {
        actions.push(GroundAction {
            name: rec.name.clone(),
            pre: ids_to_set(n, &rec.pre, &rec.name)?,
            add: ids_to_set(n, &rec.add, &rec.name)?,
            del: ids_to_set(n, &rec.del, &rec.name)?,
        });
    }
    let num_raw_actions = actions.len();
    let init = ids_to_set(n, &file.init, "init")?;
    let goal = ids_to_set(n, &file.goal, "goal")?;
    let (task, report) = GroundTask::new(file.atoms, actions, init, goal)?;

    let mutexes = MutexTable::from_pairs(n, file.mutexes.iter().map(|&[p, q]| (p, q)))?;
    let mut reachable = Bitset::new(task.num_actions());
    for &a in &file.reachable_actions {
        if a >= num_raw_actions {
            return Err(Error::Integrity(format!(
                "reachable action {a} out of range ({num_raw_actions} actions)"
            )));
        }
        if let Some(new_id) = report.action_remap[a] {
            reachable.insert(new_id);
        }
    }
    Ok(GroundBundle {
        task,
        mutexes,
        reachable: ReachableActions(reachable),
    })
}

pub fn save_ground_task(
    t: &GroundTask,
    mutexes: &MutexTable,
    reachable: &ReachableActions,
    path: impl AsRef<Path>,
) -> Result<()> {
    fs::write(path, to_json_bytes(t, mutexes, reachable))?;
    Ok(())
}

pub fn load_ground_task(path: impl AsRef<Path>) -> Result<GroundBundle> {
    from_json_bytes(&fs::read(path)?)
}
