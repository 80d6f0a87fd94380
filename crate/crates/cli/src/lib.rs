//! Command-line driver: grounding, training, evaluation, grid search, model
//! selection and reporting.

pub mod commands;
pub mod error;
pub mod manifest;
pub mod pipeline;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rsl_core::{RslConfig, SearchBudget, SelectionMode, TrainConfig};

pub use error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(name = "rsl", version, about = "Learn planning heuristics from random backward rollouts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse and ground a PDDL domain/problem pair into a task file.
    Ground(GroundArgs),
    /// Roll out regressions, sample and label states, train a network.
    Train(TrainArgs),
    /// Run GBFS from random-walk start states with a model or a baseline.
    Eval(EvalArgs),
    /// Train and evaluate every configuration of a hyper-parameter grid.
    Grid(GridArgs),
    /// Train several seeds and keep the one that does best on validation states.
    ValidateSelect(SelectArgs),
    /// Summarize and compare results files.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct GroundArgs {
    pub domain: PathBuf,
    pub problem: PathBuf,
    /// Output task file.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RslArgs {
    /// Number of training states N_t.
    #[arg(long, default_value_t = 100_000)]
    pub nt: usize,
    /// Percent of random states P_r.
    #[arg(long, default_value_t = 50.0)]
    pub pr: f64,
    /// Number of rollouts N_r.
    #[arg(long, default_value_t = 5)]
    pub nr: usize,
    /// Rollout length L.
    #[arg(long, default_value_t = 500)]
    pub len: usize,
    #[arg(long, value_enum, default_value_t = ModeArg::Novelty)]
    pub mode: ModeArg,
    /// Probability of setting a free atom when completing states; defaults to |I|/|F|.
    #[arg(long)]
    pub density: Option<f64>,
}

impl RslArgs {
    pub fn config(&self, seed: u64) -> RslConfig {
        RslConfig {
            num_rollouts: self.nr,
            length: self.len,
            num_states: self.nt,
            random_percent: self.pr,
            mode: self.mode.into(),
            seed,
            completion_density: self.density,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Random,
    Novelty,
}

impl From<ModeArg> for SelectionMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Random => SelectionMode::Random,
            ModeArg::Novelty => SelectionMode::Novelty,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct NetArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub lr: f64,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1000)]
    pub max_epochs: usize,
    #[arg(long, default_value_t = 2)]
    pub patience: usize,
}

impl NetArgs {
    pub fn config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.lr,
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            patience: self.patience,
            seed,
            ..TrainConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct BudgetArgs {
    #[arg(long, default_value_t = 100_000)]
    pub max_expansions: u64,
    /// Wall-clock limit per search, in seconds.
    #[arg(long, default_value_t = 360.0)]
    pub time_limit: f64,
    /// Cap on stored search nodes.
    #[arg(long)]
    pub max_nodes: Option<usize>,
}

impl BudgetArgs {
    pub fn budget(&self) -> SearchBudget {
        SearchBudget {
            max_expansions: Some(self.max_expansions),
            time_limit_sec: Some(self.time_limit),
            max_nodes: self.max_nodes,
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub task: PathBuf,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub rsl: RslArgs,
    #[command(flatten)]
    pub net: NetArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum HeuristicArg {
    /// The trained network given by --model.
    Rsl,
    GoalCount,
    HAdd,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub task: PathBuf,
    /// Model file; implies --heuristic rsl.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub heuristic: Option<HeuristicArg>,
    /// Name recorded in results; defaults to the heuristic name.
    #[arg(long)]
    pub name: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub states: usize,
    #[arg(long, default_value_t = 200)]
    pub walk_steps: usize,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub task: PathBuf,
    #[arg(long, value_delimiter = ',', default_values_t = [10_000, 100_000])]
    pub nt: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.0, 50.0])]
    pub pr: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [1, 5])]
    pub nr: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [50, 500])]
    pub len: Vec<usize>,
    #[arg(long, value_enum, default_value_t = ModeArg::Novelty)]
    pub mode: ModeArg,
    #[arg(long, default_value_t = 50)]
    pub eval_states: usize,
    #[arg(long, default_value_t = 200)]
    pub walk_steps: usize,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Args)]
pub struct SelectArgs {
    #[arg(long)]
    pub task: PathBuf,
    /// Number of seeds to train.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    #[arg(long, default_value_t = 10)]
    pub validation_states: usize,
    #[arg(long, default_value_t = 200)]
    pub walk_steps: usize,
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub rsl: RslArgs,
    #[command(flatten)]
    pub net: NetArgs,
    #[command(flatten)]
    pub budget: BudgetArgs,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Directory searched recursively for `*.jsonl` results.
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Ground(a) => commands::ground(&a),
        Command::Train(a) => commands::train(&a).map(|_| ()),
        Command::Eval(a) => commands::eval(&a).map(|_| ()),
        Command::Grid(a) => commands::grid(&a).map(|_| ()),
        Command::ValidateSelect(a) => commands::validate_select(&a).map(|_| ()),
        Command::Report(a) => report::report(&a),
    }
}
