//! Dataset file format.
//!
//! Header document, then the payload in train / validation / test order:
//! all feature arrays as little-endian `f32`, all label masks as `u8`, and
//! finally the realization indices as little-endian `u64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use super::{DatasetMeta, DatasetSplit, Normalizer, Sample, FEATURES_PER_STEP};
use crate::container::{self, field, Reader};
use crate::error::{Error, Result};

pub const FORMAT: &str = "fama-lnn-dataset";
pub const FORMAT_VERSION: u32 = 1;

pub fn save_dataset(split: &DatasetSplit, path: &Path) -> Result<()> {
    let meta = &split.meta;
    let mut header = Map::new();
    for (k, v) in serde_json::to_value(meta)?.as_object().expect("struct").iter() {
        header.insert(k.clone(), v.clone());
    }
    header.insert("features_per_step".into(), Value::from(FEATURES_PER_STEP));
    header.insert("normalizer".into(), serde_json::to_value(&split.normalizer)?);

    let parts = [&split.train, &split.validation, &split.test];
    let mut payload = Vec::new();
    for part in parts {
        for s in part.iter() {
            for v in &s.features {
                payload.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    for part in parts {
        for s in part.iter() {
            payload.extend_from_slice(&s.labels);
        }
    }
    for part in parts {
        for s in part.iter() {
            payload.extend_from_slice(&s.index.to_le_bytes());
        }
    }
    container::write(path, FORMAT, FORMAT_VERSION, header, &payload)
}

pub fn load_dataset(path: &Path) -> Result<DatasetSplit> {
    let (header, payload) = container::read(path, FORMAT, FORMAT_VERSION)?;
    let meta: DatasetMeta = serde_json::from_value(Value::Object(header.clone()))
        .map_err(|e| Error::format(path, format!("bad dataset header: {e}")))?;
    let normalizer: Normalizer = field(path, &header, "normalizer")?;
    let per_step: usize = field(path, &header, "features_per_step")?;
    if per_step != FEATURES_PER_STEP {
        return Err(Error::format(path, format!("unsupported features_per_step {per_step}")));
    }
    let feat_len = meta.m_observed * FEATURES_PER_STEP;
    let counts = [meta.counts.train, meta.counts.validation, meta.counts.test];
    let mut reader = Reader::new(path, &payload);
    let mut features: Vec<Vec<Vec<f32>>> = Vec::new();
    for &c in &counts {
        let flat = reader.f32s(c * feat_len)?;
        features.push(flat.chunks(feat_len.max(1)).map(<[f32]>::to_vec).collect());
    }
    let mut labels: Vec<Vec<Vec<u8>>> = Vec::new();
    for &c in &counts {
        let flat = reader.bytes(c * meta.n_ports)?;
        labels.push(flat.chunks(meta.n_ports.max(1)).map(<[u8]>::to_vec).collect());
    }
    let mut parts: Vec<Vec<Sample>> = Vec::new();
    for (i, &c) in counts.iter().enumerate() {
        let indices = reader.u64s(c)?;
        parts.push(
            indices
                .into_iter()
                .zip(std::mem::take(&mut features[i]))
                .zip(std::mem::take(&mut labels[i]))
                .map(|((index, features), labels)| Sample {
                    index,
                    features,
                    labels,
                })
                .collect(),
        );
    }
    reader.finish()?;
    let test = parts.pop().unwrap_or_default();
    let validation = parts.pop().unwrap_or_default();
    let train = parts.pop().unwrap_or_default();
    Ok(DatasetSplit {
        meta,
        train,
        validation,
        test,
        normalizer,
    })
}

/// Loads a dataset and checks it matches the requested geometry.
pub fn load_dataset_expecting(path: &Path, n_ports: usize, m_observed: usize) -> Result<DatasetSplit> {
    let split = load_dataset(path)?;
    if split.meta.n_ports != n_ports || split.meta.m_observed != m_observed {
        return Err(Error::shape(format!(
            "{} holds N = {}, m = {}; requested N = {n_ports}, m = {m_observed}",
            path.display(),
            split.meta.n_ports,
            split.meta.m_observed
        )));
    }
    Ok(split)
}

/// Same content as the binary file, one row per sample.
pub fn export_csv(split: &DatasetSplit, path: &Path) -> Result<()> {
    let m = split.meta.m_observed;
    let mut out = String::from("split,index");
    for i in 0..m {
        let _ = write!(out, ",step{i}_sinr_db,step{i}_position");
    }
    for p in 0..split.meta.n_ports {
        let _ = write!(out, ",label{p}");
    }
    out.push('\n');
    for (name, part) in [
        ("train", &split.train),
        ("validation", &split.validation),
        ("test", &split.test),
    ] {
        for s in part {
            let _ = write!(out, "{name},{}", s.index);
            for v in &s.features {
                let _ = write!(out, ",{v}");
            }
            for l in &s.labels {
                let _ = write!(out, ",{l}");
            }
            out.push('\n');
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}
