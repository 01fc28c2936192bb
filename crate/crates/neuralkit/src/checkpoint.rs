//! Single-file model checkpoints.
//!
//! Layout: an 8-byte little-endian header length, a JSON header, then every
//! parameter block as little-endian `f64`s in manifest order. Offsets in the
//! manifest are byte offsets into the data section; `checksum` is the SHA-256
//! of that section.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{NnError, Result};
use crate::model::{HeadingNetConfig, Model};
use crate::windows::NormStats;

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub name: String,
    pub shape: Vec<usize>,
    pub offset: usize,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointHeader {
    pub format_version: String,
    pub config: HeadingNetConfig,
    pub norm: Option<NormStats>,
    pub manifest: Vec<ManifestEntry>,
    pub data_bytes: usize,
    pub checksum: String,
}

pub fn encode(model: &Model) -> Result<Vec<u8>> {
    let mut data = Vec::with_capacity(model.param_count() * 8);
    let mut manifest = Vec::with_capacity(model.params().len());
    for p in model.params() {
        let offset = data.len();
        for v in p.value.data() {
            data.extend_from_slice(&v.to_le_bytes());
        }
        manifest.push(ManifestEntry {
            name: p.name.clone(),
            shape: p.value.shape().to_vec(),
            offset,
            bytes: data.len() - offset,
        });
    }
    let header = CheckpointHeader {
        format_version: FORMAT_VERSION.into(),
        config: model.config().clone(),
        norm: model.norm().cloned(),
        manifest,
        data_bytes: data.len(),
        checksum: hex::encode(Sha256::digest(&data)),
    };
    let json = serde_json::to_vec(&header).map_err(|e| NnError::InvalidArgument(format!("header encoding: {e}")))?;
    let mut out = Vec::with_capacity(8 + json.len() + data.len());
    out.extend_from_slice(&(json.len() as u64).to_le_bytes());
    out.extend_from_slice(&json);
    out.extend_from_slice(&data);
    Ok(out)
}

pub fn save(model: &Model, path: &Path) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| NnError::io(dir, e))?;
    }
    fs::write(path, encode(model)?).map_err(|e| NnError::io(path, e))
}

/// Rebuilds a model from checkpoint bytes. A model carrying normalization
/// statistics comes back in evaluation mode.
pub fn decode(bytes: &[u8], path: &Path) -> Result<Model> {
    let fail = |msg: String| NnError::Checkpoint {
        path: path.to_path_buf(),
        msg,
    };
    if bytes.len() < 8 {
        return Err(fail("truncated before the header length".into()));
    }
    let hlen = u64::from_le_bytes(bytes[..8].try_into().unwrap()) as usize;
    let body = &bytes[8..];
    if hlen > body.len() {
        return Err(fail(format!("header length {hlen} exceeds file size")));
    }
    let header: CheckpointHeader =
        serde_json::from_slice(&body[..hlen]).map_err(|e| fail(format!("bad header: {e}")))?;
    if header.format_version != FORMAT_VERSION {
        return Err(fail(format!("unsupported format version '{}'", header.format_version)));
    }
    let data = &body[hlen..];
    if data.len() != header.data_bytes {
        return Err(fail(format!("data section is {} bytes, header says {}", data.len(), header.data_bytes)));
    }
    if hex::encode(Sha256::digest(data)) != header.checksum {
        return Err(fail("checksum mismatch".into()));
    }

    let mut model = Model::from_config(header.config, 0)?;
    if model.params().len() != header.manifest.len() {
        return Err(fail(format!(
            "manifest lists {} tensors, architecture has {}",
            header.manifest.len(),
            model.params().len()
        )));
    }
    let mut blocks = Vec::with_capacity(header.manifest.len());
    for (p, e) in model.params().iter().zip(&header.manifest) {
        if p.name != e.name || p.value.shape() != e.shape.as_slice() || e.bytes != 8 * p.value.len() {
            return Err(fail(format!("manifest entry '{}' does not match parameter '{}'", e.name, p.name)));
        }
        let raw = data
            .get(e.offset..e.offset + e.bytes)
            .ok_or_else(|| fail(format!("'{}' lies outside the data section", e.name)))?;
        blocks.push(
            raw.chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect::<Vec<_>>(),
        );
    }
    model.set_param_blocks(blocks)?;
    if let Some(norm) = header.norm {
        model.set_norm(norm);
        model.eval_mode();
    }
    Ok(model)
}

pub fn load(path: &Path) -> Result<Model> {
    let bytes = fs::read(path).map_err(|e| NnError::io(path, e))?;
    decode(&bytes, path)
}
