//! Binary checkpoint files.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! offset  size  field
//! 0       8     magic "HESDCKPT"
//! 8       4     format version (u32), currently 1
//! 12      8     header length H (u64)
//! 20      H     header, UTF-8 JSON (CheckpointHeader)
//! 20+H    8·N   weight payload, N little-endian f64 in flat segment order
//! ```
//!
//! N is the sum of segment sizes from the header's segment table; loads
//! reject files whose payload length disagrees.

use crate::autodiff::{ParameterVector, SegmentSpec};
use crate::error::{Error, Result};
use crate::io::atomic_write;
use crate::io::config::RunConfig;
use crate::models::ModelSpec;
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MAGIC: &[u8; 8] = b"HESDCKPT";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub schema_version: u32,
    pub run_id: String,
    pub epoch: usize,
    pub seed: u64,
    pub optimizer_kind: String,
    pub train_accuracy: f64,
    pub gen_accuracy: f64,
    pub model: ModelSpec,
    pub segments: Vec<SegmentSpec>,
    pub config_hash: String,
    /// Full run config, embedded so `analyze` can rebuild the model and
    /// dataset from the checkpoint alone.
    pub run_config_toml: String,
}

impl CheckpointHeader {
    /// Stable identifier used to match train/generalization reports.
    pub fn checkpoint_id(&self) -> String {
        format!("{}:{:05}", self.run_id, self.epoch)
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        crate::io::config::parse_run_config(&self.run_config_toml)
    }
}

#[derive(Debug, Clone)]
pub struct LoadedCheckpoint {
    pub header: CheckpointHeader,
    pub params: ParameterVector,
}

pub fn encode_checkpoint(header: &CheckpointHeader, params: &ParameterVector) -> Result<Vec<u8>> {
    let header_json = serde_json::to_vec(header)?;
    let mut bytes =
        Vec::with_capacity(20 + header_json.len() + 8 * params.len());
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    bytes.extend_from_slice(&(header_json.len() as u64).to_le_bytes());
    bytes.extend_from_slice(&header_json);
    for v in params.values() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    Ok(bytes)
}

pub fn save_checkpoint(
    path: impl AsRef<Path>,
    header: &CheckpointHeader,
    params: &ParameterVector,
) -> Result<()> {
    let bytes = encode_checkpoint(header, params)?;
    atomic_write(path, &bytes)
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<LoadedCheckpoint> {
    let fail = |msg: &str| Error::CheckpointFormat(msg.to_string());
    if bytes.len() < 20 {
        return Err(fail("file too short for header"));
    }
    if &bytes[0..8] != MAGIC {
        return Err(fail("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version > FORMAT_VERSION {
        return Err(Error::SchemaVersion {
            found: version,
            supported: FORMAT_VERSION,
        });
    }
    let header_len = u64::from_le_bytes(bytes[12..20].try_into().unwrap()) as usize;
    if bytes.len() < 20 + header_len {
        return Err(fail("truncated header"));
    }
    let header: CheckpointHeader = serde_json::from_slice(&bytes[20..20 + header_len])?;
    let expected: usize = header.segments.iter().map(SegmentSpec::len).sum();
    let payload = &bytes[20 + header_len..];
    if payload.len() != expected * 8 {
        return Err(fail(&format!(
            "payload length {} does not match segment table ({} values)",
            payload.len(),
            expected
        )));
    }
    let mut values = Vec::with_capacity(expected);
    for chunk in payload.chunks_exact(8) {
        values.push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    let params = ParameterVector::from_parts(
        header
            .segments
            .iter()
            .map(|s| {
                let vals = values[s.range()].to_vec();
                (s.name.clone(), s.shape.clone(), vals)
            })
            .collect(),
    )?;
    Ok(LoadedCheckpoint { header, params })
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<LoadedCheckpoint> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
