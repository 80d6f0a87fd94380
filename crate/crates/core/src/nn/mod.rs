//! The learned heuristic: a residual MLP trained with MSE and Adam.

pub mod adam;
pub mod io;
pub mod model;
pub mod train;

pub use adam::{adam_step, AdamConfig, Moments};
pub use io::{load_model, model_from_bytes, model_to_bytes, save_model};
pub use model::{encode_states, init_model, HeuristicModel, HIDDEN};
pub use train::{backward, evaluate_mse, mse_loss, train, EarlyStopping, StopReason, TrainConfig, TrainHistory};
