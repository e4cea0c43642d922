use ndarray::{Array2, Axis, Zip};

use super::loss::loss_and_logit_grad;
use super::ltc::{ltc_step_batch, StepCache};
use super::{sigmoid, LossKind, ModelSpec, Weights};
use crate::error::{Error, Result};
use crate::rank::top_k_indices;

/// A batch of equal-length sequences: `steps[t]` is `B × input_dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    pub steps: Vec<Array2<f64>>,
    /// `B × N` multi-hot targets; absent for inference batches.
    pub labels: Option<Array2<f64>>,
}

impl Batch {
    /// Packs flattened sequences of `step_dim` values per step.
    pub fn from_sequences(
        sequences: &[Vec<f64>],
        step_dim: usize,
        labels: Option<&[Vec<u8>]>,
    ) -> Result<Self> {
        let b = sequences.len();
        if b == 0 {
            return Err(Error::shape("empty batch"));
        }
        let len = sequences[0].len();
        if step_dim == 0 || len == 0 || !len.is_multiple_of(step_dim) || sequences.iter().any(|s| s.len() != len) {
            return Err(Error::shape(format!(
                "sequences must share a length divisible by {step_dim}"
            )));
        }
        let n_steps = len / step_dim;
        let steps = (0..n_steps)
            .map(|t| {
                Array2::from_shape_fn((b, step_dim), |(i, j)| sequences[i][t * step_dim + j])
            })
            .collect();
        let labels = labels
            .map(|ls| {
                let n = ls.first().map_or(0, Vec::len);
                if ls.len() != b || ls.iter().any(|l| l.len() != n) {
                    return Err(Error::shape("label rows must match the batch"));
                }
                Ok(Array2::from_shape_fn((b, n), |(i, j)| f64::from(ls[i][j])))
            })
            .transpose()?;
        Ok(Self { steps, labels })
    }

    pub fn len(&self) -> usize {
        self.steps.first().map_or(0, |s| s.nrows())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Rows `indices` of every step and of the labels.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            steps: self.steps.iter().map(|s| s.select(Axis(0), indices)).collect(),
            labels: self.labels.as_ref().map(|l| l.select(Axis(0), indices)),
        }
    }
}

pub(crate) struct ForwardCache {
    ltc: Vec<StepCache>,
    /// Input to every dense layer.
    dense_inputs: Vec<Array2<f64>>,
    /// Pre-activations of the hidden dense layers.
    dense_pre: Vec<Array2<f64>>,
    pub probs: Array2<f64>,
}

fn check_finite(a: &Array2<f64>, what: impl FnOnce() -> String) -> Result<()> {
    if a.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::numeric(format!("non-finite values in {}", what())))
    }
}

pub(crate) fn forward_cached(spec: &ModelSpec, weights: &Weights, steps: &[Array2<f64>]) -> Result<ForwardCache> {
    if steps.is_empty() {
        return Err(Error::shape("empty input sequence"));
    }
    let batch = steps[0].nrows();
    if steps.iter().any(|s| s.ncols() != spec.input_dim || s.nrows() != batch) {
        return Err(Error::shape(format!(
            "every step must be {batch} × {}",
            spec.input_dim
        )));
    }
    let mut ltc = Vec::new();
    let features = match &weights.ltc {
        Some(w) => {
            let mut h = Array2::zeros((batch, spec.ltc_units));
            for (t, x) in steps.iter().enumerate() {
                let cache = ltc_step_batch(h, x, w, spec.dt);
                check_finite(&cache.h_next, || format!("ltc step {t}"))?;
                h = cache.h_next.clone();
                ltc.push(cache);
            }
            h
        }
        None => {
            if steps.len() != 1 {
                return Err(Error::shape(format!(
                    "dense baseline takes a single step, got {}",
                    steps.len()
                )));
            }
            steps[0].clone()
        }
    };

    let mut dense_inputs = Vec::with_capacity(weights.dense.len());
    let mut dense_pre = Vec::with_capacity(weights.dense.len().saturating_sub(1));
    let mut a = features;
    let last = weights.dense.len() - 1;
    for (i, layer) in weights.dense.iter().enumerate() {
        let mut z = a.dot(&layer.kernel.t());
        z += &layer.bias.view().insert_axis(Axis(0));
        check_finite(&z, || format!("dense layer {i}"))?;
        dense_inputs.push(a);
        if i == last {
            a = z.mapv(sigmoid);
        } else {
            a = z.mapv(|v| spec.activation.apply(v));
            dense_pre.push(z);
        }
    }
    Ok(ForwardCache {
        ltc,
        dense_inputs,
        dense_pre,
        probs: a,
    })
}

/// Probabilities for a whole batch, `B × N`.
pub fn forward_batch(spec: &ModelSpec, weights: &Weights, steps: &[Array2<f64>]) -> Result<Array2<f64>> {
    weights.check(spec)?;
    Ok(forward_cached(spec, weights, steps)?.probs)
}

/// Probabilities for one flattened feature sequence.
pub fn model_forward(spec: &ModelSpec, weights: &Weights, features: &[f64]) -> Result<Vec<f64>> {
    let batch = Batch::from_sequences(&[features.to_vec()], spec.input_dim, None)?;
    Ok(forward_batch(spec, weights, &batch.steps)?.into_raw_vec_and_offset().0)
}

/// Mean loss over `batch` and its exact gradient for every parameter.
pub fn backward_gradients(
    spec: &ModelSpec,
    weights: &Weights,
    batch: &Batch,
    kind: LossKind,
) -> Result<(f64, Weights)> {
    weights.check(spec)?;
    let labels = batch
        .labels
        .as_ref()
        .ok_or_else(|| Error::shape("backward pass needs labels"))?;
    let cache = forward_cached(spec, weights, &batch.steps)?;
    if labels.dim() != cache.probs.dim() {
        return Err(Error::shape(format!(
            "labels are {:?}, predictions {:?}",
            labels.dim(),
            cache.probs.dim()
        )));
    }
    let (loss, mut upstream) = loss_and_logit_grad(&cache.probs, labels, kind);
    if !loss.is_finite() {
        return Err(Error::numeric("non-finite loss"));
    }
    let mut grads = weights.zeros_like();

    let last = weights.dense.len() - 1;
    for i in (0..=last).rev() {
        let layer = &weights.dense[i];
        if i < last {
            let pre = &cache.dense_pre[i];
            Zip::from(&mut upstream).and(pre).for_each(|g, &z| {
                *g *= spec.activation.derivative(z, spec.activation.apply(z));
            });
        }
        let g = &mut grads.dense[i];
        g.kernel = upstream.t().dot(&cache.dense_inputs[i]);
        g.bias = upstream.sum_axis(Axis(0));
        upstream = upstream.dot(&layer.kernel);
        check_finite(&upstream, || format!("gradient of dense layer {i}"))?;
    }

    if let (Some(w), Some(g)) = (&weights.ltc, grads.ltc.as_mut()) {
        let dt = spec.dt;
        let mut g_h = upstream;
        for (t, step) in cache.ltc.iter().enumerate().rev() {
            let mut g_gate = Array2::zeros(g_h.raw_dim());
            let mut g_prev_direct = Array2::zeros(g_h.raw_dim());
            for b in 0..g_h.nrows() {
                for j in 0..g_h.ncols() {
                    let gh = g_h[(b, j)];
                    let den = step.den[(b, j)];
                    let f = step.gate[(b, j)];
                    let out = step.h_next[(b, j)];
                    let tau = w.tau[j];
                    g.amplitude[j] += gh * dt * f / den;
                    g.tau[j] += gh * out * dt / (tau * tau * den);
                    let g_f = gh * dt * (w.amplitude[j] - out) / den;
                    g_gate[(b, j)] = g_f * f * (1.0 - f);
                    g_prev_direct[(b, j)] = gh / den;
                }
            }
            g.input_kernel += &g_gate.t().dot(&batch.steps[t]);
            g.recurrent_kernel += &g_gate.t().dot(&step.h_prev);
            g.bias += &g_gate.sum_axis(Axis(0));
            g_h = g_prev_direct + g_gate.dot(&w.recurrent_kernel);
            check_finite(&g_h, || format!("gradient of ltc step {t}"))?;
        }
    }
    Ok((loss, grads))
}

/// Indices of the `m_labels` most probable ports, most probable first.
pub fn predict_top_indices(
    spec: &ModelSpec,
    weights: &Weights,
    features: &[f64],
    m_labels: usize,
) -> Result<Vec<usize>> {
    let probs = model_forward(spec, weights, features)?;
    Ok(top_k_indices(&probs, m_labels))
}
