use serde::{Deserialize, Serialize};

use super::Weights;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamConfig {
    pub fn new(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    m: Weights,
    v: Weights,
    step: u64,
}

impl AdamState {
    pub fn new(weights: &Weights) -> Self {
        Self {
            m: weights.zeros_like(),
            v: weights.zeros_like(),
            step: 0,
        }
    }

    pub fn step(&self) -> u64 {
        self.step
    }
}

/// One bias-corrected Adam step, in place.
pub fn adam_update(
    weights: &mut Weights,
    grads: &Weights,
    state: &mut AdamState,
    config: &AdamConfig,
) -> Result<()> {
    let g_tensors = grads.tensors();
    let mut params = weights.tensors_mut();
    if params.len() != g_tensors.len()
        || params.iter().zip(&g_tensors).any(|(p, (_, g))| p.len() != g.len())
    {
        return Err(Error::shape("gradient layout does not match the weights"));
    }
    state.step += 1;
    let t = state.step as i32;
    let c1 = 1.0 - config.beta1.powi(t);
    let c2 = 1.0 - config.beta2.powi(t);
    let (b1, b2) = (config.beta1, config.beta2);
    for (((p, (_, g)), m), v) in params
        .iter_mut()
        .zip(&g_tensors)
        .zip(state.m.tensors_mut())
        .zip(state.v.tensors_mut())
    {
        for i in 0..p.len() {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            let m_hat = m[i] / c1;
            let v_hat = v[i] / c2;
            p[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
        }
    }
    Ok(())
}
