//! Shared on-disk framing for dataset and weight files.
//!
//! A file is one line of JSON (the header document) followed by a binary
//! payload. The header always carries `format`, `version`, `payload_bytes`
//! and `checksum` (SHA-256 of the payload, lowercase hex).

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub fn checksum(payload: &[u8]) -> String {
    hex::encode(Sha256::digest(payload))
}

pub fn write(
    path: &Path,
    format: &str,
    version: u32,
    mut header: Map<String, Value>,
    payload: &[u8],
) -> Result<()> {
    header.insert("format".into(), Value::from(format));
    header.insert("version".into(), Value::from(version));
    header.insert("payload_bytes".into(), Value::from(payload.len()));
    header.insert("checksum".into(), Value::from(checksum(payload)));
    let mut bytes = serde_json::to_vec(&Value::Object(header))?;
    bytes.push(b'\n');
    bytes.extend_from_slice(payload);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path, format: &str, version: u32) -> Result<(Map<String, Value>, Vec<u8>)> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let split = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::format(path, "missing header line"))?;
    let header: Value = serde_json::from_slice(&bytes[..split])
        .map_err(|e| Error::format(path, format!("bad header: {e}")))?;
    let Value::Object(header) = header else {
        return Err(Error::format(path, "header is not a JSON object"));
    };
    let found_format = header.get("format").and_then(Value::as_str).unwrap_or("");
    if found_format != format {
        return Err(Error::format(
            path,
            format!("expected format '{format}', found '{found_format}'"),
        ));
    }
    let found_version = header.get("version").and_then(Value::as_u64);
    if found_version != Some(u64::from(version)) {
        return Err(Error::format(
            path,
            format!("unsupported version {found_version:?}, expected {version}"),
        ));
    }
    let payload = bytes[split + 1..].to_vec();
    let expected_len = header
        .get("payload_bytes")
        .and_then(Value::as_u64)
        .ok_or_else(|| Error::format(path, "header lacks payload_bytes"))?;
    if payload.len() as u64 != expected_len {
        return Err(Error::format(
            path,
            format!(
                "truncated or padded payload: {} bytes, header says {expected_len}",
                payload.len()
            ),
        ));
    }
    let expected = header
        .get("checksum")
        .and_then(Value::as_str)
        .unwrap_or_default()
        .to_string();
    let found = checksum(&payload);
    if found != expected {
        return Err(Error::Integrity {
            path: path.to_path_buf(),
            expected,
            found,
        });
    }
    Ok((header, payload))
}

/// Typed header field.
pub fn field<T: serde::de::DeserializeOwned>(
    path: &Path,
    header: &Map<String, Value>,
    key: &str,
) -> Result<T> {
    let v = header
        .get(key)
        .ok_or_else(|| Error::format(path, format!("header lacks '{key}'")))?;
    serde_json::from_value(v.clone()).map_err(|e| Error::format(path, format!("field '{key}': {e}")))
}

/// Little-endian cursor over a payload.
pub struct Reader<'a> {
    path: &'a Path,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub fn new(path: &'a Path, bytes: &'a [u8]) -> Self {
        Self { path, bytes, pos: 0 }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| Error::format(self.path, "payload ends early"))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub fn f32s(&mut self, n: usize) -> Result<Vec<f32>> {
        Ok(self
            .take(n * 4)?
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect())
    }

    pub fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        Ok(self
            .take(n * 8)?
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    pub fn u64s(&mut self, n: usize) -> Result<Vec<u64>> {
        Ok(self
            .take(n * 8)?
            .chunks_exact(8)
            .map(|c| u64::from_le_bytes(c.try_into().expect("8 bytes")))
            .collect())
    }

    pub fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        self.take(n)
    }

    pub fn finish(self) -> Result<()> {
        if self.pos != self.bytes.len() {
            return Err(Error::format(self.path, "trailing bytes after payload"));
        }
        Ok(())
    }
}
