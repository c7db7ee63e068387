//! Model files: `MODEL_MAGIC`, a little-endian u32 header length, a JSON
//! header, then every parameter as little-endian f32 in [`Network::params`]
//! order. The header carries a SHA-256 of the weight blob.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{LayerSpec, Network, Shape3};
use crate::{Error, Result};

pub const MODEL_MAGIC: &[u8; 8] = b"EMOFNET1";

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    input: Shape3,
    layers: Vec<LayerSpec>,
    seed: u64,
    param_count: usize,
    sha256: String,
    #[serde(default)]
    meta: BTreeMap<String, String>,
}

pub fn model_to_bytes(net: &Network, meta: &BTreeMap<String, String>) -> Result<Vec<u8>> {
    let mut blob = Vec::with_capacity(net.param_count() * 4);
    for p in net.params() {
        for &v in p {
            blob.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    let header = Header {
        input: net.input_shape(),
        layers: net.specs(),
        seed: net.seed(),
        param_count: net.param_count(),
        sha256: format!("{:x}", Sha256::digest(&blob)),
        meta: meta.clone(),
    };
    let header = serde_json::to_vec(&header)?;
    let mut out = Vec::with_capacity(12 + header.len() + blob.len());
    out.extend_from_slice(MODEL_MAGIC);
    out.extend_from_slice(&(header.len() as u32).to_le_bytes());
    out.extend_from_slice(&header);
    out.extend_from_slice(&blob);
    Ok(out)
}

pub fn model_from_bytes(bytes: &[u8]) -> Result<(Network, BTreeMap<String, String>)> {
    let corrupt = |m: &str| Error::CorruptModel(m.to_string());
    if bytes.len() < 12 || &bytes[..8] != MODEL_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let hlen = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let body = &bytes[12..];
    if body.len() < hlen {
        return Err(corrupt("truncated header"));
    }
    let header: Header = serde_json::from_slice(&body[..hlen])?;
    let blob = &body[hlen..];
    if blob.len() != header.param_count * 4 {
        return Err(corrupt("weight blob length does not match header"));
    }
    if format!("{:x}", Sha256::digest(blob)) != header.sha256 {
        return Err(corrupt("checksum mismatch"));
    }
    let mut net = Network::uninitialized(header.input, &header.layers, header.seed)?;
    if net.param_count() != header.param_count {
        return Err(corrupt("layer configuration does not match parameter count"));
    }
    let mut values = blob
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes(c.try_into().unwrap()) as f64);
    for p in net.params_mut() {
        for v in p.iter_mut() {
            *v = values.next().unwrap();
        }
    }
    Ok((net, header.meta))
}

pub fn save_model(path: &Path, net: &Network, meta: &BTreeMap<String, String>) -> Result<()> {
    std::fs::write(path, model_to_bytes(net, meta)?).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<(Network, BTreeMap<String, String>)> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    model_from_bytes(&bytes)
}
