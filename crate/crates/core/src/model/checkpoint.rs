//! Binary checkpoint container.
//!
//! Layout (little-endian):
//!
//! ```text
//! magic   b"GAITNET\0"
//! u32     format version
//! u32     header length N
//! [N]     JSON header: { "config": GaitNetConfig, "layers": [LayerKind] }
//! f64*    per layer: weights, then bias
//! ```
//!
//! Tensors are stored as raw IEEE-754 bits, so a save/load round trip is
//! bit-identical.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{GaitNetConfig, ModelParams};
use crate::nn::{LayerKind, LayerParams};
use crate::{Error, Result};

const MAGIC: &[u8; 8] = b"GAITNET\0";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Header {
    config: GaitNetConfig,
    layers: Vec<LayerKind>,
}

pub fn write_checkpoint<W: Write>(params: &ModelParams, mut w: W) -> Result<()> {
    let header = serde_json::to_vec(&Header {
        config: params.config.clone(),
        layers: params.layers.iter().map(|l| l.kind).collect(),
    })?;
    w.write_all(MAGIC)?;
    w.write_all(&CHECKPOINT_VERSION.to_le_bytes())?;
    w.write_all(&(header.len() as u32).to_le_bytes())?;
    w.write_all(&header)?;
    let mut buf = Vec::with_capacity(params.parameter_count() * 8);
    for layer in &params.layers {
        for v in layer.weights.iter().chain(&layer.bias) {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<ModelParams> {
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("not a gaitnet checkpoint".into()));
    }
    let mut word = [0u8; 4];
    r.read_exact(&mut word)?;
    let version = u32::from_le_bytes(word);
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported checkpoint version {version}")));
    }
    r.read_exact(&mut word)?;
    let mut header = vec![0u8; u32::from_le_bytes(word) as usize];
    r.read_exact(&mut header)?;
    let header: Header = serde_json::from_slice(&header)?;
    if header.config.layer_kinds()? != header.layers {
        return Err(Error::Checkpoint("layer table does not match the stored config".into()));
    }

    let mut read_f64s = |n: usize| -> Result<Vec<f64>> {
        let mut bytes = vec![0u8; n * 8];
        r.read_exact(&mut bytes)?;
        Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
    };
    let mut layers = Vec::with_capacity(header.layers.len());
    for kind in &header.layers {
        let weights = read_f64s(kind.weight_len())?;
        let bias = read_f64s(kind.bias_len())?;
        layers.push(LayerParams::new(*kind, weights, bias)?);
    }
    let mut rest = Vec::new();
    r.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(Error::Checkpoint(format!("{} trailing bytes", rest.len())));
    }
    ModelParams::from_layers(header.config, layers)
}

pub fn save_checkpoint(params: &ModelParams, path: &Path) -> Result<()> {
    let mut bytes = Vec::new();
    write_checkpoint(params, &mut bytes)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn load_checkpoint(path: &Path) -> Result<ModelParams> {
    read_checkpoint(fs::read(path)?.as_slice())
}
