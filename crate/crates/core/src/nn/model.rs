//! Residual MLP: `|F| → 250 → 250 → [250 → 250, + skip] → 1`, ReLU hidden units.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::Rng as _;

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::seed::{rng_for, Stream};
use crate::strips::State;

pub const HIDDEN: usize = 250;
pub const NUM_LAYERS: usize = 5;

/// Dense layer with `weights` of shape `(out, in)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Dense {
    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Self {
            weights: Array2::zeros((outputs, inputs)),
            bias: Array1::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weights.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weights.nrows()
    }

    fn apply(&self, input: &ArrayView2<'_, f64>) -> Array2<f64> {
        let mut out = input.dot(&self.weights.t());
        out += &self.bias;
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeuristicModel {
    num_atoms: usize,
    /// input, hidden, residual 1, residual 2, output
    pub layers: Vec<Dense>,
}

/// Post-activation values kept for backpropagation.
pub(crate) struct Activations {
    pub input: Array2<f64>,
    pub h0: Array2<f64>,
    pub z: Array2<f64>,
    pub r1: Array2<f64>,
    pub r2: Array2<f64>,
    pub u: Array2<f64>,
    pub out: Array1<f64>,
}

fn relu(mut a: Array2<f64>) -> Array2<f64> {
    a.mapv_inplace(|v| v.max(0.0));
    a
}

impl HeuristicModel {
    pub fn zeros(num_atoms: usize) -> Self {
        Self {
            num_atoms,
            layers: vec![
                Dense::zeros(num_atoms, HIDDEN),
                Dense::zeros(HIDDEN, HIDDEN),
                Dense::zeros(HIDDEN, HIDDEN),
                Dense::zeros(HIDDEN, HIDDEN),
                Dense::zeros(HIDDEN, 1),
            ],
        }
    }

    pub(crate) fn from_layers(num_atoms: usize, layers: Vec<Dense>) -> Result<Self> {
        let expected = [
            (num_atoms, HIDDEN),
            (HIDDEN, HIDDEN),
            (HIDDEN, HIDDEN),
            (HIDDEN, HIDDEN),
            (HIDDEN, 1),
        ];
        if layers.len() != NUM_LAYERS {
            return Err(Error::DimensionMismatch {
                expected: NUM_LAYERS,
                found: layers.len(),
            });
        }
        for (layer, (i, o)) in layers.iter().zip(expected) {
            if layer.inputs() != i || layer.outputs() != o || layer.bias.len() != o {
                return Err(Error::DimensionMismatch {
                    expected: i * o,
                    found: layer.inputs() * layer.outputs(),
                });
            }
        }
        Ok(Self { num_atoms, layers })
    }

    pub fn num_atoms(&self) -> usize {
        self.num_atoms
    }

    pub fn num_parameters(&self) -> usize {
        self.layers.iter().map(|l| l.weights.len() + l.bias.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.weights.iter().chain(l.bias.iter()).all(|v| v.is_finite()))
    }

    fn check_width(&self, width: usize) -> Result<()> {
        if width != self.num_atoms {
            return Err(Error::DimensionMismatch {
                expected: self.num_atoms,
                found: width,
            });
        }
        Ok(())
    }

    pub(crate) fn forward_cached(&self, input: Array2<f64>) -> Activations {
        let [l0, l1, l2, l3, l4] = &self.layers[..] else {
            unreachable!("model always has five layers")
        };
        let h0 = relu(l0.apply(&input.view()));
        let z = relu(l1.apply(&h0.view()));
        let r1 = relu(l2.apply(&z.view()));
        let r2 = relu(l3.apply(&r1.view()));
        let u = &r2 + &z;
        let out = l4.apply(&u.view()).index_axis_move(Axis(1), 0);
        Activations { input, h0, z, r1, r2, u, out }
    }

    /// Raw network output for a batch of 0/1 input rows.
    pub fn forward_matrix(&self, input: Array2<f64>) -> Result<Array1<f64>> {
        self.check_width(input.ncols())?;
        Ok(self.forward_cached(input).out)
    }

    pub fn forward(&self, s: &State) -> Result<f64> {
        self.check_width(s.width())?;
        Ok(self.forward_cached(encode_states(self.num_atoms, [s.bits()])).out[0])
    }

    /// Raw outputs for many states, evaluated as one matrix product chain.
    pub fn forward_batch<'a>(&self, states: impl IntoIterator<Item = &'a State>) -> Result<Vec<f64>> {
        let states: Vec<&Bitset> = states.into_iter().map(|s| s.bits()).collect();
        if let Some(bad) = states.iter().find(|b| b.len() != self.num_atoms) {
            self.check_width(bad.len())?;
        }
        if states.is_empty() {
            return Ok(Vec::new());
        }
        Ok(self.forward_cached(encode_states(self.num_atoms, states)).out.to_vec())
    }

    /// `max(0, forward(s))`
    pub fn heuristic_value(&self, s: &State) -> Result<f64> {
        Ok(self.forward(s)?.max(0.0))
    }
}

/// One row per state, 1.0 where the atom holds.
pub fn encode_states<'a>(num_atoms: usize, states: impl IntoIterator<Item = &'a Bitset>) -> Array2<f64> {
    let states: Vec<&Bitset> = states.into_iter().collect();
    let mut m = Array2::zeros((states.len(), num_atoms));
    for (row, bits) in states.iter().enumerate() {
        for p in bits.ones() {
            m[[row, p]] = 1.0;
        }
    }
    m
}

/// Weights uniform in `±sqrt(6 / fan_in)`, biases zero.
pub fn init_model(num_atoms: usize, seed: u64) -> HeuristicModel {
    assert!(num_atoms >= 1, "model needs at least one input");
    let mut rng = rng_for(seed, Stream::Init, 0);
    let mut model = HeuristicModel::zeros(num_atoms);
    for layer in &mut model.layers {
        let bound = (6.0 / layer.inputs() as f64).sqrt();
        layer
            .weights
            .iter_mut()
            .for_each(|w| *w = rng.gen_range(-bound..=bound));
    }
    model
}
