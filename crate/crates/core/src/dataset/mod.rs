//! Supervised datasets for port prediction.
//!
//! Inputs are the observed ports as a sequence ordered by port index, one
//! `[SINR dB, n/(N-1)]` pair per step. Labels mark the `M` ports with the
//! highest ground-truth SINR. Features are kept as `f32` exactly as they are
//! stored on disk; standardization happens on the way into the model.

mod io;
mod normalize;

pub use io::{export_csv, load_dataset, load_dataset_expecting, save_dataset, FORMAT_VERSION};
pub use normalize::{fit_transform, FeaturePipeline, Normalizer, Pca};

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{AntennaConfig, ChannelGenerator, FadingParams};
use crate::error::{Error, Result};
use crate::fama::{sinr_per_port, SystemConfig};
use crate::rank::top_k_indices;
use crate::rng::stream_rng;
use crate::selection::{observed_indices, ObservedPort};

/// Values per sequence step: SINR in dB and normalized port position.
pub const FEATURES_PER_STEP: usize = 2;

/// Floor applied before converting SINR to dB.
pub const SINR_DB_FLOOR: f64 = -100.0;

pub const SPLIT_FRACTIONS: [f64; 3] = [0.70, 0.15, 0.15];

/// Multi-hot vector with ones at the `m_labels` largest entries.
pub fn top_m_labels(sinr: &[f64], m_labels: usize) -> Result<Vec<u8>> {
    if m_labels == 0 || m_labels > sinr.len() {
        return Err(Error::config(format!(
            "label count must lie in 1..={}, got {m_labels}",
            sinr.len()
        )));
    }
    let mut labels = vec![0u8; sinr.len()];
    for i in top_k_indices(sinr, m_labels) {
        labels[i] = 1;
    }
    Ok(labels)
}

/// Flattened raw feature sequence for a set of observed ports.
pub fn raw_features(observed: &[ObservedPort], n_ports: usize) -> Vec<f32> {
    let denom = (n_ports.max(2) - 1) as f64;
    let mut out = Vec::with_capacity(observed.len() * FEATURES_PER_STEP);
    let mut ordered = observed.to_vec();
    ordered.sort_by_key(|p| p.index);
    for p in ordered {
        let db = (10.0 * p.sinr.log10()).max(SINR_DB_FLOOR);
        out.push(db as f32);
        out.push((p.index as f64 / denom) as f32);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    /// Realization index within the dataset's seed stream.
    pub index: u64,
    pub features: Vec<f32>,
    pub labels: Vec<u8>,
}

impl Sample {
    pub fn steps(&self) -> usize {
        self.features.len() / FEATURES_PER_STEP
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub validation: usize,
    pub test: usize,
}

impl SplitCounts {
    /// 70/15/15 with rounding; the test split takes the remainder.
    pub fn for_total(count: usize) -> Self {
        let train = (count as f64 * SPLIT_FRACTIONS[0]).round() as usize;
        let validation = (count as f64 * SPLIT_FRACTIONS[1]).round() as usize;
        Self {
            train,
            validation,
            test: count - train - validation,
        }
    }

    pub fn total(&self) -> usize {
        self.train + self.validation + self.test
    }
}

/// Everything needed to regenerate the dataset's realizations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub n_ports: usize,
    pub m_observed: usize,
    pub m_labels: usize,
    pub alpha: f64,
    pub mu: u32,
    pub rhat: f64,
    pub aperture: f64,
    pub n_users: usize,
    pub signal_power: f64,
    pub noise_power: f64,
    pub seed: u64,
    pub counts: SplitCounts,
}

impl DatasetMeta {
    pub fn antenna(&self) -> AntennaConfig {
        AntennaConfig {
            n_ports: self.n_ports,
            aperture: self.aperture,
        }
    }

    pub fn params(&self) -> FadingParams {
        FadingParams {
            alpha: self.alpha,
            mu: self.mu,
            rhat: self.rhat,
        }
    }

    pub fn system(&self) -> SystemConfig {
        SystemConfig {
            n_users: self.n_users,
            signal_power: self.signal_power,
            noise_power: self.noise_power,
            ..SystemConfig::default()
        }
    }

    pub fn observed(&self) -> Vec<usize> {
        observed_indices(self.n_ports, self.m_observed).unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Split {
    Train,
    Validation,
    Test,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetSplit {
    pub meta: DatasetMeta,
    pub train: Vec<Sample>,
    pub validation: Vec<Sample>,
    pub test: Vec<Sample>,
    pub normalizer: Normalizer,
}

impl DatasetSplit {
    pub fn split(&self, which: Split) -> &[Sample] {
        match which {
            Split::Train => &self.train,
            Split::Validation => &self.validation,
            Split::Test => &self.test,
        }
    }

    /// Ground-truth SINR vectors of one split, regenerated from the seed.
    pub fn ground_truth(&self, which: Split) -> Result<Vec<Vec<f64>>> {
        let generator =
            ChannelGenerator::new(&self.meta.system(), &self.meta.antenna(), &self.meta.params())?;
        let system = self.meta.system();
        self.split(which)
            .par_iter()
            .map(|s| {
                sinr_per_port(&generator.realization(self.meta.seed, s.index), &system)
                    .map(|v| v.values)
            })
            .collect()
    }

    /// Ground truth of all three splits.
    pub fn all_ground_truth(&self) -> Result<GroundTruth> {
        Ok(GroundTruth {
            train: self.ground_truth(Split::Train)?,
            validation: self.ground_truth(Split::Validation)?,
            test: self.ground_truth(Split::Test)?,
        })
    }

    /// Copy with labels recomputed for a different `M`.
    pub fn relabel(&self, m_labels: usize) -> Result<Self> {
        if m_labels == self.meta.m_labels {
            return Ok(self.clone());
        }
        self.relabel_with(&self.all_ground_truth()?, m_labels)
    }

    /// Like [`relabel`](Self::relabel) with precomputed ground truth.
    pub fn relabel_with(&self, truth: &GroundTruth, m_labels: usize) -> Result<Self> {
        let mut out = self.clone();
        out.meta.m_labels = m_labels;
        for (samples, t) in [
            (&mut out.train, &truth.train),
            (&mut out.validation, &truth.validation),
            (&mut out.test, &truth.test),
        ] {
            if samples.len() != t.len() {
                return Err(Error::shape("ground truth does not match the dataset"));
            }
            for (s, sinr) in samples.iter_mut().zip(t) {
                s.labels = top_m_labels(sinr, m_labels)?;
            }
        }
        Ok(out)
    }
}

/// Per-port SINR of every sample, split by split.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub train: Vec<Vec<f64>>,
    pub validation: Vec<Vec<f64>>,
    pub test: Vec<Vec<f64>>,
}

/// Generates `count` realizations and splits them 70/15/15.
pub fn build_dataset(
    system: &SystemConfig,
    antenna: &AntennaConfig,
    params: &FadingParams,
    m_observed: usize,
    m_labels: usize,
    count: usize,
    seed: u64,
) -> Result<DatasetSplit> {
    if count < 10 {
        return Err(Error::config(format!("dataset needs at least 10 samples, got {count}")));
    }
    if m_labels == 0 || m_labels > antenna.n_ports {
        return Err(Error::config(format!(
            "label count must lie in 1..={}, got {m_labels}",
            antenna.n_ports
        )));
    }
    let generator = ChannelGenerator::new(system, antenna, params)?;
    let observed = observed_indices(antenna.n_ports, m_observed)?;

    let samples: Vec<Sample> = (0..count as u64)
        .into_par_iter()
        .map(|index| {
            let sinr = sinr_per_port(&generator.realization(seed, index), system)?.values;
            Ok(Sample {
                index,
                features: raw_features(&ObservedPort::collect(&sinr, &observed), antenna.n_ports),
                labels: top_m_labels(&sinr, m_labels)?,
            })
        })
        .collect::<Result<_>>()?;

    let counts = SplitCounts::for_total(count);
    let mut order: Vec<usize> = (0..count).collect();
    order.shuffle(&mut stream_rng(seed, u64::MAX));
    let mut assignment = vec![Split::Test; count];
    for &i in &order[..counts.train] {
        assignment[i] = Split::Train;
    }
    for &i in &order[counts.train..counts.train + counts.validation] {
        assignment[i] = Split::Validation;
    }
    let (mut train, mut validation, mut test) = (Vec::new(), Vec::new(), Vec::new());
    for (sample, which) in samples.into_iter().zip(assignment) {
        match which {
            Split::Train => train.push(sample),
            Split::Validation => validation.push(sample),
            Split::Test => test.push(sample),
        }
    }
    let normalizer = Normalizer::fit(FEATURES_PER_STEP, train.iter().map(|s| s.features.as_slice()))?;

    Ok(DatasetSplit {
        meta: DatasetMeta {
            n_ports: antenna.n_ports,
            m_observed,
            m_labels,
            alpha: params.alpha,
            mu: params.mu,
            rhat: params.rhat,
            aperture: antenna.aperture,
            n_users: system.n_users,
            signal_power: system.signal_power,
            noise_power: system.noise_power,
            seed,
            counts,
        },
        train,
        validation,
        test,
        normalizer,
    })
}
