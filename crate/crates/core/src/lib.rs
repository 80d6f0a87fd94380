//! Learning goal-distance heuristics for classical planning from random
//! backward rollouts.
//!
//! The pipeline: ground a STRIPS task ([`grounding`]), roll regressions out
//! from the goal ([`regression`]), label sampled states by regression depth
//! ([`dataset`]), fit a residual network to the labels ([`nn`]) and use it to
//! guide greedy best-first search ([`search`]).

pub mod bitset;
pub mod dataset;
pub mod error;
pub mod fixtures;
pub mod grounding;
pub mod nn;
pub mod regression;
pub mod search;
pub mod seed;
pub mod strips;

pub use bitset::Bitset;
pub use dataset::{LabeledDataset, Record, RslConfig};
pub use error::{Error, Result};
pub use grounding::{GroundBundle, MutexTable, ReachableActions};
pub use nn::{HeuristicModel, TrainConfig, TrainHistory};
pub use regression::{RegressionSet, SelectionMode};
pub use search::{SearchBudget, SearchResult, SearchStatus};
pub use strips::{ActionId, AtomId, GroundAction, GroundTask, PreImage, State};
