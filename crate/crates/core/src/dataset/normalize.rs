//! Feature standardization and PCA.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const STD_FLOOR: f64 = 1e-12;

/// Per-feature standardization, fit on the training split only.
///
/// Sequences are stored flattened, `features_per_step` values per step;
/// statistics are pooled over every step of every sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub features_per_step: usize,
    pub mean: Option<Vec<f64>>,
    pub std: Option<Vec<f64>>,
}

impl Normalizer {
    pub fn unfit(features_per_step: usize) -> Self {
        Self {
            features_per_step,
            mean: None,
            std: None,
        }
    }

    pub fn is_fit(&self) -> bool {
        self.mean.is_some() && self.std.is_some()
    }

    pub fn fit<'a>(
        features_per_step: usize,
        sequences: impl IntoIterator<Item = &'a [f32]>,
    ) -> Result<Self> {
        let d = features_per_step;
        let mut sum = vec![0.0; d];
        let mut sum_sq = vec![0.0; d];
        let mut rows = 0usize;
        let seqs: Vec<&[f32]> = sequences.into_iter().collect();
        for seq in &seqs {
            if seq.len() % d != 0 {
                return Err(Error::shape(format!(
                    "sequence length {} is not a multiple of {d}",
                    seq.len()
                )));
            }
            for step in seq.chunks_exact(d) {
                for (j, &v) in step.iter().enumerate() {
                    sum[j] += f64::from(v);
                }
                rows += 1;
            }
        }
        if rows == 0 {
            return Err(Error::config("cannot fit a normalizer on no data"));
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / rows as f64).collect();
        for seq in &seqs {
            for step in seq.chunks_exact(d) {
                for (j, &v) in step.iter().enumerate() {
                    let c = f64::from(v) - mean[j];
                    sum_sq[j] += c * c;
                }
            }
        }
        let std = sum_sq
            .iter()
            .map(|s| (s / rows as f64).sqrt().max(STD_FLOOR))
            .collect();
        Ok(Self {
            features_per_step: d,
            mean: Some(mean),
            std: Some(std),
        })
    }

    /// `(x - mean) / std` per feature, flattened.
    pub fn transform(&self, sequence: &[f32]) -> Result<Vec<f64>> {
        let (Some(mean), Some(std)) = (&self.mean, &self.std) else {
            return Err(Error::config("normalizer has not been fit"));
        };
        let d = self.features_per_step;
        if !sequence.len().is_multiple_of(d) {
            return Err(Error::shape(format!(
                "sequence length {} is not a multiple of {d}",
                sequence.len()
            )));
        }
        Ok(sequence
            .iter()
            .enumerate()
            .map(|(i, &v)| (f64::from(v) - mean[i % d]) / std[i % d])
            .collect())
    }
}

/// Principal components of flattened feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// Row-major `k × d`; each row is one unit-norm component.
    pub components: Vec<f64>,
    pub n_components: usize,
    pub input_dim: usize,
    pub explained_variance: Vec<f64>,
    pub variance_threshold: f64,
}

impl Pca {
    /// Keeps the fewest leading components whose variance share reaches
    /// `variance_threshold` (at least one).
    pub fn fit(data: &[Vec<f64>], variance_threshold: f64) -> Result<Self> {
        let n = data.len();
        if n == 0 {
            return Err(Error::config("cannot fit PCA on no data"));
        }
        let d = data[0].len();
        if d == 0 || data.iter().any(|r| r.len() != d) {
            return Err(Error::shape("PCA rows must be non-empty and equal length"));
        }
        let mut mean = vec![0.0; d];
        for row in data {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n as f64);
        let centered = DMatrix::from_fn(n, d, |i, j| data[i][j] - mean[j]);
        let cov = centered.transpose() * &centered / n as f64;
        let eig = SymmetricEigen::new(cov);
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let total: f64 = eig.eigenvalues.iter().map(|v| v.max(0.0)).sum();
        let mut kept = Vec::new();
        let mut acc = 0.0;
        for &i in &order {
            kept.push(i);
            acc += eig.eigenvalues[i].max(0.0);
            if total <= 0.0 || acc >= variance_threshold * total - 1e-15 * total {
                break;
            }
        }
        let mut components = Vec::with_capacity(kept.len() * d);
        for &i in &kept {
            components.extend(eig.eigenvectors.column(i).iter());
        }
        Ok(Self {
            mean,
            n_components: kept.len(),
            input_dim: d,
            explained_variance: kept.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect(),
            components,
            variance_threshold,
        })
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i * self.input_dim..(i + 1) * self.input_dim]
    }

    pub fn project(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::shape(format!(
                "PCA expects {} inputs, got {}",
                self.input_dim,
                x.len()
            )));
        }
        Ok((0..self.n_components)
            .map(|i| {
                self.component(i)
                    .iter()
                    .zip(x.iter().zip(&self.mean))
                    .map(|(c, (v, m))| c * (v - m))
                    .sum()
            })
            .collect())
    }

    pub fn reconstruct(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (i, &zi) in z.iter().enumerate() {
            for (o, c) in out.iter_mut().zip(self.component(i)) {
                *o += zi * c;
            }
        }
        out
    }
}

/// Standardization plus optional PCA, in the order they are applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturePipeline {
    pub normalizer: Normalizer,
    pub pca: Option<Pca>,
}

impl FeaturePipeline {
    pub fn standardize(normalizer: Normalizer) -> Self {
        Self {
            normalizer,
            pca: None,
        }
    }

    /// Standardization followed by PCA fit on the standardized training data.
    pub fn with_pca<'a>(
        normalizer: Normalizer,
        train: impl IntoIterator<Item = &'a [f32]>,
        variance_threshold: f64,
    ) -> Result<Self> {
        let data = train
            .into_iter()
            .map(|s| normalizer.transform(s))
            .collect::<Result<Vec<_>>>()?;
        let pca = Pca::fit(&data, variance_threshold)?;
        Ok(Self {
            normalizer,
            pca: Some(pca),
        })
    }

    /// Width of the transformed vector for a raw sequence of `raw_len` values.
    pub fn output_len(&self, raw_len: usize) -> usize {
        self.pca.as_ref().map_or(raw_len, |p| p.n_components)
    }

    pub fn transform(&self, sequence: &[f32]) -> Result<Vec<f64>> {
        fit_transform(&self.normalizer, self.pca.as_ref(), sequence)
    }
}

/// Applies a fitted normalizer and, when given, a PCA projection.
pub fn fit_transform(normalizer: &Normalizer, pca: Option<&Pca>, sequence: &[f32]) -> Result<Vec<f64>> {
    let standardized = normalizer.transform(sequence)?;
    match pca {
        Some(p) => p.project(&standardized),
        None => Ok(standardized),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_feature_maps_to_zero() {
        let seqs: Vec<Vec<f32>> = (0..5).map(|i| vec![3.0, i as f32]).collect();
        let n = Normalizer::fit(2, seqs.iter().map(|s| s.as_slice())).unwrap();
        for s in &seqs {
            let t = n.transform(s).unwrap();
            assert_eq!(t[0], 0.0);
            assert!(t[1].is_finite());
        }
    }

    #[test]
    fn transformed_train_mean_is_zero() {
        let seqs: Vec<Vec<f32>> = (0..40)
            .map(|i| {
                let x = i as f32;
                vec![x * 0.37 - 2.0, (x * 1.3).sin(), x * x * 0.01, 5.0 - x]
            })
            .collect();
        let n = Normalizer::fit(2, seqs.iter().map(|s| s.as_slice())).unwrap();
        let mut sums = [0.0f64; 2];
        let mut sq = [0.0f64; 2];
        let mut rows = 0.0;
        for s in &seqs {
            for step in n.transform(s).unwrap().chunks(2) {
                sums[0] += step[0];
                sums[1] += step[1];
                sq[0] += step[0] * step[0];
                sq[1] += step[1] * step[1];
                rows += 1.0;
            }
        }
        for j in 0..2 {
            assert!((sums[j] / rows).abs() < 1e-9);
            assert!((sq[j] / rows - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unfit_normalizer_errors() {
        assert!(Normalizer::unfit(2).transform(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn rank_one_data_needs_one_component() {
        let data: Vec<Vec<f64>> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.1 - 2.0;
                vec![1.0 + 2.0 * t, -0.5 + 0.7 * t]
            })
            .collect();
        let pca = Pca::fit(&data, 0.95).unwrap();
        assert_eq!(pca.n_components, 1);
        let c = pca.component(0);
        assert!((c.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-12);
        for row in &data {
            let back = pca.reconstruct(&pca.project(row).unwrap());
            for (a, b) in back.iter().zip(row) {
                assert!((a - b).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn components_are_orthonormal() {
        let data: Vec<Vec<f64>> = (0..200)
            .map(|i| {
                let a = (i as f64 * 0.71).sin();
                let b = (i as f64 * 1.37).cos();
                let c = (i as f64 * 0.13).sin();
                vec![a, b + 0.1 * a, c, a - c, 0.5 * b]
            })
            .collect();
        let pca = Pca::fit(&data, 1.0).unwrap();
        for i in 0..pca.n_components {
            for j in 0..pca.n_components {
                let dot: f64 = pca.component(i).iter().zip(pca.component(j)).map(|(x, y)| x * y).sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-8);
            }
        }
    }
}
