//! Backpropagation and minibatch training with early stopping.

use ndarray::{Array1, Array2, Axis, Zip};
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::bitset::Bitset;
use crate::dataset::LabeledDataset;
use crate::error::{Error, Result};
use crate::nn::adam::{adam_step, AdamConfig, Moments};
use crate::nn::model::{encode_states, Dense, HeuristicModel};
use crate::seed::{rng_for, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-4,
            batch_size: 64,
            max_epochs: 1000,
            patience: 2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = self.learning_rate > 0.0
            && self.batch_size > 0
            && self.max_epochs > 0
            && self.patience >= 1
            && self.beta1 > 0.0
            && self.beta2 > 0.0
            && self.epsilon > 0.0;
        if !positive {
            return Err(Error::InvalidConfig("training parameters must be positive".into()));
        }
        Ok(())
    }

    pub fn adam(&self) -> AdamConfig {
        AdamConfig {
            learning_rate: self.learning_rate,
            beta1: self.beta1,
            beta2: self.beta2,
            epsilon: self.epsilon,
        }
    }
}

/// Gradient of the batch MSE, one entry per model layer.
pub type Gradients = Vec<Dense>;

/// MSE of `preds` against `targets`.
pub fn mse_loss(preds: &[f64], targets: &[f64]) -> Result<f64> {
    if preds.len() != targets.len() {
        return Err(Error::LengthMismatch(preds.len(), targets.len()));
    }
    if preds.is_empty() {
        return Err(Error::LengthMismatch(0, 0));
    }
    let sum: f64 = preds.iter().zip(targets).map(|(p, t)| (p - t).powi(2)).sum();
    Ok(sum / preds.len() as f64)
}

fn relu_mask(grad: &mut Array2<f64>, activation: &Array2<f64>) {
    Zip::from(grad).and(activation).for_each(|g, &a| {
        if a <= 0.0 {
            *g = 0.0;
        }
    });
}

fn dense_grad(delta: &Array2<f64>, input: &Array2<f64>) -> Dense {
    Dense {
        weights: delta.t().dot(input),
        bias: delta.sum_axis(Axis(0)),
    }
}

/// Exact gradient of the batch MSE with respect to every parameter, plus the
/// batch loss. ReLU has derivative 0 at 0.
pub fn backward(model: &HeuristicModel, input: Array2<f64>, targets: &[f64]) -> Result<(Gradients, f64)> {
    if input.nrows() == 0 {
        return Err(Error::EmptySplit("batch"));
    }
    if input.nrows() != targets.len() {
        return Err(Error::LengthMismatch(input.nrows(), targets.len()));
    }
    if input.ncols() != model.num_atoms() {
        return Err(Error::DimensionMismatch {
            expected: model.num_atoms(),
            found: input.ncols(),
        });
    }
    let act = model.forward_cached(input);
    let n = targets.len() as f64;
    let residual: Array1<f64> = &act.out - &Array1::from(targets.to_vec());
    let loss = residual.iter().map(|r| r * r).sum::<f64>() / n;

    let d_out = (residual * (2.0 / n)).insert_axis(Axis(1));
    let layers = &model.layers;

    let g4 = dense_grad(&d_out, &act.u);
    let d_u = d_out.dot(&layers[4].weights);

    let mut d_pre3 = d_u.clone();
    relu_mask(&mut d_pre3, &act.r2);
    let g3 = dense_grad(&d_pre3, &act.r1);

    let mut d_pre2 = d_pre3.dot(&layers[3].weights);
    relu_mask(&mut d_pre2, &act.r1);
    let g2 = dense_grad(&d_pre2, &act.z);

    let mut d_pre1 = d_u + d_pre2.dot(&layers[2].weights);
    relu_mask(&mut d_pre1, &act.z);
    let g1 = dense_grad(&d_pre1, &act.h0);

    let mut d_pre0 = d_pre1.dot(&layers[1].weights);
    relu_mask(&mut d_pre0, &act.h0);
    let g0 = dense_grad(&d_pre0, &act.input);

    Ok((vec![g0, g1, g2, g3, g4], loss))
}

/// Adam state for every layer of a model.
pub struct Optimizer {
    cfg: AdamConfig,
    step: u64,
    moments: Vec<(Moments, Moments)>,
}

impl Optimizer {
    pub fn new(model: &HeuristicModel, cfg: AdamConfig) -> Self {
        Self {
            cfg,
            step: 0,
            moments: model
                .layers
                .iter()
                .map(|l| (Moments::zeros(l.weights.len()), Moments::zeros(l.bias.len())))
                .collect(),
        }
    }

    pub fn apply(&mut self, model: &mut HeuristicModel, grads: &Gradients) {
        self.step += 1;
        for ((layer, grad), (mw, mb)) in model.layers.iter_mut().zip(grads).zip(&mut self.moments) {
            adam_step(
                layer.weights.as_slice_mut().expect("standard layout"),
                grad.weights.as_slice().expect("standard layout"),
                mw,
                self.step,
                &self.cfg,
            );
            adam_step(
                layer.bias.as_slice_mut().expect("standard layout"),
                grad.bias.as_slice().expect("standard layout"),
                mb,
                self.step,
                &self.cfg,
            );
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    Patience,
    MaxEpochs,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub train_mse: f64,
    pub validation_mse: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochStats>,
    /// Zero-based index of the epoch whose weights were returned.
    pub best_epoch: usize,
    pub stop_reason: StopReason,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub patience: usize,
}

/// Patience-based early stopping on validation loss.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    best: f64,
    best_epoch: usize,
    stale: usize,
    epoch: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Improved,
    Continue,
    Stop,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: f64::INFINITY,
            best_epoch: 0,
            stale: 0,
            epoch: 0,
        }
    }

    pub fn observe(&mut self, validation_loss: f64) -> Verdict {
        let epoch = self.epoch;
        self.epoch += 1;
        if validation_loss < self.best {
            self.best = validation_loss;
            self.best_epoch = epoch;
            self.stale = 0;
            return Verdict::Improved;
        }
        self.stale += 1;
        if self.stale >= self.patience {
            Verdict::Stop
        } else {
            Verdict::Continue
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

const EVAL_CHUNK: usize = 512;

/// Mean squared error of the model over a set of (state bits, target) rows.
pub fn evaluate_mse(model: &HeuristicModel, states: &[&Bitset], targets: &[f64]) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::EmptySplit("evaluation"));
    }
    let mut sum = 0.0;
    for (chunk, tchunk) in states.chunks(EVAL_CHUNK).zip(targets.chunks(EVAL_CHUNK)) {
        let out = model.forward_matrix(encode_states(model.num_atoms(), chunk.iter().copied()))?;
        sum += out.iter().zip(tchunk).map(|(p, t)| (p - t).powi(2)).sum::<f64>();
    }
    Ok(sum / states.len() as f64)
}

/// Minibatch Adam on the training split with early stopping on the
/// validation split. Returns the weights of the best validation epoch.
pub fn train(
    model: &HeuristicModel,
    dataset: &LabeledDataset,
    cfg: &TrainConfig,
) -> Result<(HeuristicModel, TrainHistory)> {
    cfg.validate()?;
    let (mut train_x, mut train_y) = (Vec::new(), Vec::new());
    let (mut val_x, mut val_y) = (Vec::new(), Vec::new());
    for (r, &is_train) in dataset.records.iter().zip(&dataset.train) {
        if r.state.width() != model.num_atoms() {
            return Err(Error::DimensionMismatch {
                expected: model.num_atoms(),
                found: r.state.width(),
            });
        }
        let (xs, ys) = if is_train {
            (&mut train_x, &mut train_y)
        } else {
            (&mut val_x, &mut val_y)
        };
        xs.push(r.state.bits());
        ys.push(r.label as f64);
    }
    if train_x.is_empty() {
        return Err(Error::EmptySplit("training"));
    }
    if val_x.is_empty() {
        return Err(Error::EmptySplit("validation"));
    }

    let mut current = model.clone();
    let mut best = model.clone();
    let mut optimizer = Optimizer::new(model, cfg.adam());
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut rng = rng_for(cfg.seed, Stream::Training, 0);
    let mut order: Vec<usize> = (0..train_x.len()).collect();
    let mut epochs = Vec::new();
    let mut stop_reason = StopReason::MaxEpochs;

    for epoch in 0..cfg.max_epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let input = encode_states(model.num_atoms(), batch.iter().map(|&i| train_x[i]));
            let targets: Vec<f64> = batch.iter().map(|&i| train_y[i]).collect();
            let (grads, loss) = backward(&current, input, &targets)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite { epoch });
            }
            loss_sum += loss * batch.len() as f64;
            optimizer.apply(&mut current, &grads);
        }
        let train_mse = loss_sum / train_x.len() as f64;
        let validation_mse = evaluate_mse(&current, &val_x, &val_y)?;
        if !validation_mse.is_finite() || !current.is_finite() {
            return Err(Error::NonFinite { epoch });
        }
        epochs.push(EpochStats { train_mse, validation_mse });
        log::debug!("epoch {epoch}: train {train_mse:.4} validation {validation_mse:.4}");

        match stopper.observe(validation_mse) {
            Verdict::Improved => best.clone_from(&current),
            Verdict::Continue => {}
            Verdict::Stop => {
                stop_reason = StopReason::Patience;
                break;
            }
        }
    }

    Ok((
        best,
        TrainHistory {
            epochs,
            best_epoch: stopper.best_epoch(),
            stop_reason,
            learning_rate: cfg.learning_rate,
            batch_size: cfg.batch_size,
            max_epochs: cfg.max_epochs,
            patience: cfg.patience,
        },
    ))
}
