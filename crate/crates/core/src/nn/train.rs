//! Mini-batch training with early stopping on validation loss.

use log::debug;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{
    adam_update, backward_gradients, forward_batch, loss, AdamConfig, AdamState, Batch, LossKind,
    ModelSpec, Weights,
};
use crate::error::{Error, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub loss: LossKind,
    /// Epochs without validation improvement before stopping.
    pub patience: usize,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            learning_rate: 3e-3,
            epochs: 30,
            batch_size: 64,
            loss: LossKind::Bce,
            patience: 5,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config("learning_rate must be positive"));
        }
        if self.epochs == 0 {
            return Err(Error::config("epochs must be at least 1"));
        }
        if self.batch_size == 0 {
            return Err(Error::config("batch_size must be at least 1"));
        }
        Ok(())
    }
}

pub struct TrainingData {
    pub train: Batch,
    pub validation: Batch,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    /// 0 is the untrained initialization.
    pub epoch: usize,
    pub train_loss: f64,
    pub validation_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Weights with the lowest validation loss seen.
    pub weights: Weights,
    pub history: Vec<EpochRecord>,
    pub best_epoch: usize,
    pub best_validation_loss: f64,
    /// Training stopped on a non-finite loss.
    pub diverged: bool,
}

fn evaluate(spec: &ModelSpec, weights: &Weights, batch: &Batch, kind: LossKind) -> Result<f64> {
    if batch.labels.is_none() {
        return Err(Error::shape("evaluation batch needs labels"));
    }
    // bounded memory on large splits
    const CHUNK: usize = 2048;
    let n = batch.len();
    let mut total = 0.0;
    for start in (0..n).step_by(CHUNK) {
        let idx: Vec<usize> = (start..(start + CHUNK).min(n)).collect();
        let part = batch.select(&idx);
        let probs = forward_batch(spec, weights, &part.steps)?;
        let labels = part.labels.as_ref().expect("checked above");
        total += loss(&probs, labels, kind) * idx.len() as f64;
    }
    Ok(total / n as f64)
}

pub fn train(spec: &ModelSpec, data: &TrainingData, config: &TrainConfig) -> Result<TrainOutcome> {
    let init = Weights::init(spec, config.seed)?;
    train_from(spec, init, data, config)
}

/// Trains starting from `weights`.
pub fn train_from(
    spec: &ModelSpec,
    mut weights: Weights,
    data: &TrainingData,
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    weights.check(spec)?;
    if data.train.is_empty() || data.validation.is_empty() {
        return Err(Error::config("training and validation splits must be non-empty"));
    }
    let adam = AdamConfig::new(config.learning_rate);
    let mut state = AdamState::new(&weights);

    let initial_val = evaluate(spec, &weights, &data.validation, config.loss)?;
    let initial_train = evaluate(spec, &weights, &data.train, config.loss)?;
    let mut history = vec![EpochRecord {
        epoch: 0,
        train_loss: initial_train,
        validation_loss: initial_val,
    }];
    let mut best = weights.clone();
    let mut best_loss = initial_val;
    let mut best_epoch = 0;
    let mut since_best = 0;
    let mut diverged = false;

    let n = data.train.len();
    let mut order: Vec<usize> = (0..n).collect();
    'epochs: for epoch in 1..=config.epochs {
        order.shuffle(&mut stream_rng(config.seed, epoch as u64));
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch = data.train.select(chunk);
            let step = backward_gradients(spec, &weights, &batch, config.loss);
            let (l, grads) = match step {
                Ok(v) => v,
                Err(Error::Numeric(msg)) => {
                    debug!("epoch {epoch}: {msg}; keeping last finite checkpoint");
                    diverged = true;
                    break 'epochs;
                }
                Err(e) => return Err(e),
            };
            total += l * chunk.len() as f64;
            adam_update(&mut weights, &grads, &mut state, &adam)?;
            weights.project();
            if !weights.is_finite() {
                diverged = true;
                break 'epochs;
            }
        }
        let validation_loss = match evaluate(spec, &weights, &data.validation, config.loss) {
            Ok(v) if v.is_finite() => v,
            Ok(_) | Err(Error::Numeric(_)) => {
                diverged = true;
                break;
            }
            Err(e) => return Err(e),
        };
        history.push(EpochRecord {
            epoch,
            train_loss: total / n as f64,
            validation_loss,
        });
        if validation_loss < best_loss {
            best_loss = validation_loss;
            best = weights.clone();
            best_epoch = epoch;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best > config.patience {
                break;
            }
        }
    }
    Ok(TrainOutcome {
        weights: best,
        history,
        best_epoch,
        best_validation_loss: best_loss,
        diverged,
    })
}
