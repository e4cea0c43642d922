//! Liquid time-constant cell, advanced by one fused solver step:
//!
//! ```text
//! f  = sigmoid(W_in x + W_rec h + b)
//! h' = (h + dt f A) / (1 + dt (1/tau + f))
//! ```
//!
//! The denominator exceeds one, so with `A = 0` the state contracts.

use ndarray::{Array2, Axis, Zip};

use super::{sigmoid, LtcWeights};
use crate::error::{Error, Result};

/// One step for a single sample.
pub fn ltc_step(h: &[f64], x: &[f64], weights: &LtcWeights, dt: f64) -> Result<Vec<f64>> {
    let units = weights.bias.len();
    if h.len() != units || x.len() != weights.input_kernel.ncols() {
        return Err(Error::shape(format!(
            "ltc_step expects h of {units} and x of {}, got {} and {}",
            weights.input_kernel.ncols(),
            h.len(),
            x.len()
        )));
    }
    if h.iter().chain(x).any(|v| !v.is_finite()) {
        return Err(Error::numeric("ltc_step received non-finite input"));
    }
    let mut out = Vec::with_capacity(units);
    for i in 0..units {
        let z = weights.bias[i]
            + weights.input_kernel.row(i).iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
            + weights.recurrent_kernel.row(i).iter().zip(h).map(|(w, v)| w * v).sum::<f64>();
        let f = sigmoid(z);
        let num = h[i] + dt * f * weights.amplitude[i];
        let den = 1.0 + dt * (1.0 / weights.tau[i] + f);
        out.push(num / den);
    }
    Ok(out)
}

/// Quantities kept from a batched step for the backward pass.
pub(crate) struct StepCache {
    pub h_prev: Array2<f64>,
    pub gate: Array2<f64>,
    pub den: Array2<f64>,
    pub h_next: Array2<f64>,
}

/// One step for a batch: `x` is `B × input_dim`, `h` is `B × H`.
pub(crate) fn ltc_step_batch(
    h: Array2<f64>,
    x: &Array2<f64>,
    weights: &LtcWeights,
    dt: f64,
) -> StepCache {
    let mut gate = x.dot(&weights.input_kernel.t());
    gate += &h.dot(&weights.recurrent_kernel.t());
    gate += &weights.bias.view().insert_axis(Axis(0));
    gate.mapv_inplace(sigmoid);

    let mut den = Array2::zeros(h.raw_dim());
    let mut h_next = Array2::zeros(h.raw_dim());
    for ((mut den_row, mut out_row), (h_row, f_row)) in den
        .outer_iter_mut()
        .zip(h_next.outer_iter_mut())
        .zip(h.outer_iter().zip(gate.outer_iter()))
    {
        Zip::from(&mut den_row)
            .and(&mut out_row)
            .and(&h_row)
            .and(&f_row)
            .and(&weights.amplitude)
            .and(&weights.tau)
            .for_each(|d, o, &hv, &f, &a, &tau| {
                *d = 1.0 + dt * (1.0 / tau + f);
                *o = (hv + dt * f * a) / *d;
            });
    }
    StepCache {
        h_prev: h,
        gate,
        den,
        h_next,
    }
}
