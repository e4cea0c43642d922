//! Weights file: header document followed by every parameter as a
//! little-endian `f64`, in the canonical order of [`Weights::tensors`].

use std::path::Path;

use serde_json::{Map, Value};

use super::{ModelSpec, Weights};
use crate::container::{self, field, Reader};
use crate::error::{Error, Result};

pub const WEIGHTS_FORMAT: &str = "fama-lnn-weights";
pub const WEIGHTS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightsFile {
    pub spec: ModelSpec,
    pub weights: Weights,
    pub seed: u64,
    /// Free-form training metadata (feature pipeline, history, ...).
    pub metadata: Value,
}

pub fn save_weights(path: &Path, file: &WeightsFile) -> Result<()> {
    file.weights.check(&file.spec)?;
    let mut header = Map::new();
    header.insert("spec".into(), serde_json::to_value(&file.spec)?);
    header.insert("seed".into(), Value::from(file.seed));
    header.insert("metadata".into(), file.metadata.clone());
    let layout: Vec<Value> = file
        .weights
        .tensors()
        .iter()
        .map(|(name, t)| serde_json::json!({ "name": name, "len": t.len() }))
        .collect();
    header.insert("layout".into(), Value::Array(layout));
    let payload: Vec<u8> = file
        .weights
        .flatten()
        .iter()
        .flat_map(|v| v.to_le_bytes())
        .collect();
    container::write(path, WEIGHTS_FORMAT, WEIGHTS_FORMAT_VERSION, header, &payload)
}

pub fn load_weights(path: &Path) -> Result<WeightsFile> {
    let (header, payload) = container::read(path, WEIGHTS_FORMAT, WEIGHTS_FORMAT_VERSION)?;
    let spec: ModelSpec = field(path, &header, "spec")?;
    spec.validate()?;
    let seed: u64 = field(path, &header, "seed")?;
    let metadata = header.get("metadata").cloned().unwrap_or(Value::Null);
    let count = Weights::init(&spec, 0)?.param_count();
    if payload.len() != count * 8 {
        return Err(Error::format(
            path,
            format!("expected {count} parameters, payload holds {} bytes", payload.len()),
        ));
    }
    let mut reader = Reader::new(path, &payload);
    let flat = reader.f64s(count)?;
    reader.finish()?;
    Ok(WeightsFile {
        weights: Weights::from_flat(&spec, &flat)?,
        spec,
        seed,
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("w.bin");
        let spec = ModelSpec::ltc(2, 5, vec![7], 9);
        let file = WeightsFile {
            weights: Weights::init(&spec, 4).unwrap(),
            spec,
            seed: 4,
            metadata: serde_json::json!({ "note": "x" }),
        };
        save_weights(&path, &file).unwrap();
        assert_eq!(load_weights(&path).unwrap(), file);

        let mut bytes = std::fs::read(&path).unwrap();
        let n = bytes.len();
        bytes[n - 1] ^= 1;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(load_weights(&path), Err(Error::Integrity { .. })));
    }
}
