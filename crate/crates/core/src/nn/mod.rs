//! Small differentiable core: a liquid time-constant recurrent layer, a
//! dense stack, a sigmoid multi-label head, BCE and soft-F1 losses,
//! hand-written reverse-mode gradients and Adam.
//!
//! Everything runs in `f64`. Only the fixed architecture family
//! `LTC (optional) -> dense* -> sigmoid` is differentiated.

mod adam;
mod io;
mod loss;
mod ltc;
mod model;
mod train;
mod weights;

pub use adam::{adam_update, AdamConfig, AdamState};
pub use io::{load_weights, save_weights, WeightsFile, WEIGHTS_FORMAT_VERSION};
pub use loss::{loss, loss_and_logit_grad, LossKind};
pub use ltc::ltc_step;
pub use model::{
    backward_gradients, forward_batch, model_forward, predict_top_indices, Batch,
};
pub use train::{train, train_from, EpochRecord, TrainConfig, TrainOutcome, TrainingData};
pub use weights::{DenseWeights, LtcWeights, Weights, TAU_MIN};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Relu,
    Tanh,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
        }
    }
}

/// Architecture of one model.
///
/// With `ltc_units = 0` the recurrent stage is skipped and the dense stack
/// reads a single input step of width `input_dim` (the dense baseline).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub input_dim: usize,
    pub ltc_units: usize,
    pub dense_layers: Vec<usize>,
    pub output_dim: usize,
    pub activation: Activation,
    /// Fused solver step.
    pub dt: f64,
    /// Initial value of every learnable time constant.
    pub tau_init: f64,
}

impl ModelSpec {
    pub fn ltc(input_dim: usize, ltc_units: usize, dense_layers: Vec<usize>, output_dim: usize) -> Self {
        Self {
            input_dim,
            ltc_units,
            dense_layers,
            output_dim,
            activation: Activation::Relu,
            dt: 1.0,
            tau_init: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 {
            return Err(Error::config("model input and output widths must be at least 1"));
        }
        if self.dense_layers.contains(&0) {
            return Err(Error::config("dense layer widths must be at least 1"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::config("dt must be positive"));
        }
        if !(self.tau_init > 0.0 && self.tau_init.is_finite()) {
            return Err(Error::config("tau must be positive"));
        }
        Ok(())
    }

    /// `(fan_in, fan_out)` of every dense layer including the output layer.
    pub fn dense_shapes(&self) -> Vec<(usize, usize)> {
        let mut fan_in = if self.ltc_units > 0 {
            self.ltc_units
        } else {
            self.input_dim
        };
        let mut shapes = Vec::with_capacity(self.dense_layers.len() + 1);
        for &w in self.dense_layers.iter().chain(std::iter::once(&self.output_dim)) {
            shapes.push((fan_in, w));
            fan_in = w;
        }
        shapes
    }
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
