//! Trained port predictors: a network plus the feature pipeline it was fit
//! with, usable wherever a [`PortPredictor`] is expected.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::dataset::{raw_features, DatasetSplit, FeaturePipeline, Sample, FEATURES_PER_STEP};
use crate::error::{Error, Result};
use crate::nn::{
    forward_batch, load_weights, save_weights, train, Activation, Batch, EpochRecord, ModelSpec,
    TrainConfig, TrainOutcome, TrainingData, Weights, WeightsFile,
};
use crate::selection::{ObservedPort, PortPredictor};

/// Fraction of variance kept when PCA preprocessing is enabled.
pub const PCA_VARIANCE: f64 = 0.99;

const PREDICT_CHUNK: usize = 1024;

/// Architecture choice independent of the dataset geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Architecture {
    /// 0 selects the dense baseline over the flattened sequence.
    pub ltc_units: usize,
    pub dense_layers: Vec<usize>,
    pub activation: Activation,
    /// Project the flattened, standardized features with PCA. Only valid
    /// for the dense baseline.
    pub pca: bool,
}

impl Default for Architecture {
    fn default() -> Self {
        Self {
            ltc_units: 32,
            dense_layers: vec![64],
            activation: Activation::Relu,
            pca: false,
        }
    }
}

impl Architecture {
    pub fn validate(&self) -> Result<()> {
        if self.pca && self.ltc_units > 0 {
            return Err(Error::config("PCA preprocessing requires ltc_units = 0"));
        }
        if self.dense_layers.contains(&0) {
            return Err(Error::config("dense widths must be at least 1"));
        }
        Ok(())
    }

    fn pipeline(&self, data: &DatasetSplit) -> Result<FeaturePipeline> {
        if self.pca {
            FeaturePipeline::with_pca(
                data.normalizer.clone(),
                data.train.iter().map(|s| s.features.as_slice()),
                PCA_VARIANCE,
            )
        } else {
            Ok(FeaturePipeline::standardize(data.normalizer.clone()))
        }
    }
}

/// A trained network bound to the geometry it was trained for.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainedModel {
    pub spec: ModelSpec,
    pub weights: Weights,
    pub pipeline: FeaturePipeline,
    pub n_ports: usize,
    pub m_observed: usize,
    pub m_labels: usize,
    pub seed: u64,
    pub history: Vec<EpochRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Metadata {
    pipeline: FeaturePipeline,
    n_ports: usize,
    m_observed: usize,
    m_labels: usize,
    history: Vec<EpochRecord>,
}

/// Model-ready inputs for `samples`.
pub fn model_inputs(pipeline: &FeaturePipeline, samples: &[Sample]) -> Result<Vec<Vec<f64>>> {
    samples.iter().map(|s| pipeline.transform(&s.features)).collect()
}

/// Train/validation batches for a dataset under `pipeline`.
pub fn training_data(data: &DatasetSplit, pipeline: &FeaturePipeline, step_dim: usize) -> Result<TrainingData> {
    let pack = |samples: &[Sample]| -> Result<Batch> {
        let inputs = model_inputs(pipeline, samples)?;
        let labels: Vec<Vec<u8>> = samples.iter().map(|s| s.labels.clone()).collect();
        Batch::from_sequences(&inputs, step_dim, Some(&labels))
    };
    Ok(TrainingData {
        train: pack(&data.train)?,
        validation: pack(&data.validation)?,
    })
}

/// Fits `arch` on `data` and returns the best-validation model.
pub fn fit(data: &DatasetSplit, arch: &Architecture, config: &TrainConfig) -> Result<(TrainedModel, TrainOutcome)> {
    arch.validate()?;
    let pipeline = arch.pipeline(data)?;
    let raw_len = data.meta.m_observed * FEATURES_PER_STEP;
    let input_dim = if arch.ltc_units == 0 {
        pipeline.output_len(raw_len)
    } else {
        FEATURES_PER_STEP
    };
    let spec = ModelSpec {
        activation: arch.activation,
        ..ModelSpec::ltc(input_dim, arch.ltc_units, arch.dense_layers.clone(), data.meta.n_ports)
    };
    spec.validate()?;
    let batches = training_data(data, &pipeline, input_dim)?;
    let outcome = train(&spec, &batches, config)?;
    let model = TrainedModel {
        spec,
        weights: outcome.weights.clone(),
        pipeline,
        n_ports: data.meta.n_ports,
        m_observed: data.meta.m_observed,
        m_labels: data.meta.m_labels,
        seed: config.seed,
        history: outcome.history.clone(),
    };
    Ok((model, outcome))
}

impl TrainedModel {
    /// Port probabilities for already-transformed inputs.
    pub fn predict_inputs(&self, inputs: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        let mut out = Vec::with_capacity(inputs.len());
        for chunk in inputs.chunks(PREDICT_CHUNK) {
            let batch = Batch::from_sequences(chunk, self.spec.input_dim, None)?;
            let probs = forward_batch(&self.spec, &self.weights, &batch.steps)?;
            out.extend(probs.rows().into_iter().map(|r| r.to_vec()));
        }
        Ok(out)
    }

    /// Port probabilities for stored dataset samples.
    pub fn predict_samples(&self, samples: &[Sample]) -> Result<Vec<Vec<f64>>> {
        self.predict_inputs(&model_inputs(&self.pipeline, samples)?)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let metadata = Metadata {
            pipeline: self.pipeline.clone(),
            n_ports: self.n_ports,
            m_observed: self.m_observed,
            m_labels: self.m_labels,
            history: self.history.clone(),
        };
        save_weights(
            path,
            &WeightsFile {
                spec: self.spec.clone(),
                weights: self.weights.clone(),
                seed: self.seed,
                metadata: json!(metadata),
            },
        )
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = load_weights(path)?;
        let meta: Metadata = serde_json::from_value(file.metadata)
            .map_err(|e| Error::format(path, format!("model metadata: {e}")))?;
        if file.spec.output_dim != meta.n_ports {
            return Err(Error::format(path, "output width does not match port count"));
        }
        Ok(Self {
            spec: file.spec,
            weights: file.weights,
            pipeline: meta.pipeline,
            n_ports: meta.n_ports,
            m_observed: meta.m_observed,
            m_labels: meta.m_labels,
            seed: file.seed,
            history: meta.history,
        })
    }
}

impl PortPredictor for TrainedModel {
    fn n_ports(&self) -> usize {
        self.n_ports
    }

    fn predict_batch(&self, batch: &[Vec<ObservedPort>]) -> Result<Vec<Vec<f64>>> {
        if let Some(bad) = batch.iter().find(|o| o.len() != self.m_observed) {
            return Err(Error::shape(format!(
                "model expects {} observed ports, got {}",
                self.m_observed,
                bad.len()
            )));
        }
        let inputs = batch
            .iter()
            .map(|o| self.pipeline.transform(&raw_features(o, self.n_ports)))
            .collect::<Result<Vec<_>>>()?;
        self.predict_inputs(&inputs)
    }
}
