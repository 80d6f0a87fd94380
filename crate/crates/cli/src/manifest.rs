use std::fs;
use std::path::Path;

use anyhow::Context as _;
use rsl_core::{RslConfig, SearchBudget, TrainConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliResult;

pub const MANIFEST_FILE: &str = "manifest.json";

/// How a set of search start states was generated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub count: usize,
    pub walk_steps: usize,
    pub seed: u64,
    /// `eval` or `validation`; the two never share a random stream.
    pub purpose: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub num_states: Vec<usize>,
    pub random_percent: Vec<f64>,
    pub num_rollouts: Vec<usize>,
    pub length: Vec<usize>,
    pub mode: rsl_core::SelectionMode,
    pub eval_states: usize,
}

impl GridSpec {
    pub fn len(&self) -> usize {
        self.num_states.len() * self.random_percent.len() * self.num_rollouts.len() * self.length.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian product in row-major order over (N_t, P_r, N_r, L).
    pub fn configs(&self, seed_for: impl Fn(usize) -> u64) -> Vec<RslConfig> {
        let mut out = Vec::with_capacity(self.len());
        for &nt in &self.num_states {
            for &pr in &self.random_percent {
                for &nr in &self.num_rollouts {
                    for &len in &self.length {
                        out.push(RslConfig {
                            num_rollouts: nr,
                            length: len,
                            num_states: nt,
                            random_percent: pr,
                            mode: self.mode,
                            seed: seed_for(out.len()),
                            completion_density: None,
                        });
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentManifest {
    pub command: String,
    pub tool_version: String,
    pub task_path: String,
    pub task_sha256: String,
    pub seed: u64,
    pub output_dir: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rsl_config: Option<RslConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_config: Option<TrainConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<SearchBudget>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub states: Option<StateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_models: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heuristic: Option<String>,
}

impl ExperimentManifest {
    pub fn new(command: &str, task_path: &Path, task_sha256: String, seed: u64, out: &Path) -> Self {
        Self {
            command: command.to_string(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            task_path: task_path.display().to_string(),
            task_sha256,
            seed,
            output_dir: out.display().to_string(),
            rsl_config: None,
            train_config: None,
            budget: None,
            states: None,
            grid: None,
            num_models: None,
            heuristic: None,
        }
    }

    /// Creates `dir` and writes the manifest into it.
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        write_json(&dir.join(MANIFEST_FILE), self)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes).as_slice())
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
