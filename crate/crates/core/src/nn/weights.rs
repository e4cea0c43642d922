use ndarray::{Array1, Array2};
use rand::Rng;

use super::ModelSpec;
use crate::error::{Error, Result};
use crate::rng::stream_rng;

/// Lower bound enforced on time constants after each optimizer step.
pub const TAU_MIN: f64 = 1e-3;

const LTC_INIT_RANGE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub struct LtcWeights {
    /// `H × input_dim`
    pub input_kernel: Array2<f64>,
    /// `H × H`
    pub recurrent_kernel: Array2<f64>,
    pub bias: Array1<f64>,
    pub amplitude: Array1<f64>,
    pub tau: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseWeights {
    /// `fan_out × fan_in`
    pub kernel: Array2<f64>,
    pub bias: Array1<f64>,
}

/// All parameters. The canonical order used by weight files and flat views
/// is: LTC input kernel, recurrent kernel, bias, amplitude, tau; then each
/// dense layer's kernel and bias, output layer last.
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub ltc: Option<LtcWeights>,
    pub dense: Vec<DenseWeights>,
}

impl Weights {
    /// Glorot-uniform dense kernels, LTC kernels in ±0.1, unit amplitude,
    /// `tau = spec.tau_init`, zero biases.
    pub fn init(spec: &ModelSpec, seed: u64) -> Result<Self> {
        spec.validate()?;
        let mut rng = stream_rng(seed, 0);
        let ltc = (spec.ltc_units > 0).then(|| {
            let h = spec.ltc_units;
            LtcWeights {
                input_kernel: Array2::from_shape_fn((h, spec.input_dim), |_| {
                    rng.gen_range(-LTC_INIT_RANGE..LTC_INIT_RANGE)
                }),
                recurrent_kernel: Array2::from_shape_fn((h, h), |_| {
                    rng.gen_range(-LTC_INIT_RANGE..LTC_INIT_RANGE)
                }),
                bias: Array1::zeros(h),
                amplitude: Array1::ones(h),
                tau: Array1::from_elem(h, spec.tau_init),
            }
        });
        let dense = spec
            .dense_shapes()
            .into_iter()
            .map(|(fan_in, fan_out)| {
                let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
                DenseWeights {
                    kernel: Array2::from_shape_fn((fan_out, fan_in), |_| rng.gen_range(-limit..limit)),
                    bias: Array1::zeros(fan_out),
                }
            })
            .collect();
        Ok(Self { ltc, dense })
    }

    pub fn zeros_like(&self) -> Self {
        let mut out = self.clone();
        for t in out.tensors_mut() {
            t.fill(0.0);
        }
        out
    }

    /// Named parameter tensors in canonical order.
    pub fn tensors(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = Vec::new();
        if let Some(l) = &self.ltc {
            out.push(("ltc.input_kernel".into(), slice(&l.input_kernel)));
            out.push(("ltc.recurrent_kernel".into(), slice(&l.recurrent_kernel)));
            out.push(("ltc.bias".into(), l.bias.as_slice().expect("contiguous")));
            out.push(("ltc.amplitude".into(), l.amplitude.as_slice().expect("contiguous")));
            out.push(("ltc.tau".into(), l.tau.as_slice().expect("contiguous")));
        }
        for (i, d) in self.dense.iter().enumerate() {
            out.push((format!("dense{i}.kernel"), slice(&d.kernel)));
            out.push((format!("dense{i}.bias"), d.bias.as_slice().expect("contiguous")));
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out: Vec<&mut [f64]> = Vec::new();
        if let Some(l) = &mut self.ltc {
            out.push(l.input_kernel.as_slice_mut().expect("contiguous"));
            out.push(l.recurrent_kernel.as_slice_mut().expect("contiguous"));
            out.push(l.bias.as_slice_mut().expect("contiguous"));
            out.push(l.amplitude.as_slice_mut().expect("contiguous"));
            out.push(l.tau.as_slice_mut().expect("contiguous"));
        }
        for d in &mut self.dense {
            out.push(d.kernel.as_slice_mut().expect("contiguous"));
            out.push(d.bias.as_slice_mut().expect("contiguous"));
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|(_, t)| t.len()).sum()
    }

    pub fn flatten(&self) -> Vec<f64> {
        self.tensors().into_iter().flat_map(|(_, t)| t.iter().copied()).collect()
    }

    /// Rebuilds weights for `spec` from a flat canonical-order vector.
    pub fn from_flat(spec: &ModelSpec, flat: &[f64]) -> Result<Self> {
        let mut w = Self::init(spec, 0)?;
        if flat.len() != w.param_count() {
            return Err(Error::shape(format!(
                "expected {} parameters, got {}",
                w.param_count(),
                flat.len()
            )));
        }
        let mut offset = 0;
        for t in w.tensors_mut() {
            let n = t.len();
            t.copy_from_slice(&flat[offset..offset + n]);
            offset += n;
        }
        Ok(w)
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|(_, t)| t.iter().all(|v| v.is_finite()))
    }

    /// Keeps every time constant at or above [`TAU_MIN`].
    pub fn project(&mut self) {
        if let Some(l) = &mut self.ltc {
            l.tau.mapv_inplace(|t| t.max(TAU_MIN));
        }
    }

    /// Checks tensor shapes against `spec`.
    pub fn check(&self, spec: &ModelSpec) -> Result<()> {
        let shapes = spec.dense_shapes();
        let ltc_ok = match (&self.ltc, spec.ltc_units) {
            (None, 0) => true,
            (Some(l), h) if h > 0 => {
                l.input_kernel.dim() == (h, spec.input_dim)
                    && l.recurrent_kernel.dim() == (h, h)
                    && l.bias.len() == h
                    && l.amplitude.len() == h
                    && l.tau.len() == h
            }
            _ => false,
        };
        let dense_ok = self.dense.len() == shapes.len()
            && self
                .dense
                .iter()
                .zip(&shapes)
                .all(|(d, &(i, o))| d.kernel.dim() == (o, i) && d.bias.len() == o);
        if ltc_ok && dense_ok {
            Ok(())
        } else {
            Err(Error::shape("weights do not match the model spec"))
        }
    }
}

fn slice(a: &Array2<f64>) -> &[f64] {
    a.as_slice().expect("standard layout")
}
