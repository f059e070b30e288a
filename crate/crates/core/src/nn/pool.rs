use super::{FeatureMap, Tensor};
use crate::{Error, Result};

/// Output length of non-overlapping pooling; the trailing remainder is dropped.
pub fn pooled_len(len: usize, pool: usize) -> Option<usize> {
    (pool >= 1 && pool <= len).then(|| len / pool)
}

/// Argmax positions recorded by a forward max-pool, one per output element,
/// as flat channel-major offsets into the pooled input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoolIndices {
    pub channels: usize,
    pub input_len: usize,
    pub output_len: usize,
    pub argmax: Vec<usize>,
}

pub fn maxpool1d(input: &FeatureMap, pool: usize) -> Result<(FeatureMap, PoolIndices)> {
    let output_len = pooled_len(input.length(), pool).ok_or_else(|| {
        Error::config(format!("pool size {pool} invalid for length {}", input.length()))
    })?;
    let channels = input.channels();
    let mut out = vec![0.0; channels * output_len];
    let mut argmax = vec![0; channels * output_len];
    maxpool1d_into(input.values(), 1, channels, input.length(), pool, &mut out, &mut argmax);
    let indices = PoolIndices { channels, input_len: input.length(), output_len, argmax };
    Ok((FeatureMap::new(channels, output_len, out)?, indices))
}

/// Routes `upstream` to the recorded argmax positions; zeros elsewhere.
pub fn maxpool1d_backward(indices: &PoolIndices, upstream: &FeatureMap) -> FeatureMap {
    assert_eq!(upstream.channels(), indices.channels);
    assert_eq!(upstream.length(), indices.output_len);
    let mut dinput = vec![0.0; indices.channels * indices.input_len];
    maxpool1d_backward_into(&indices.argmax, 1, upstream.values(), &mut dinput);
    FeatureMap::new(indices.channels, indices.input_len, dinput).expect("shape from forward pass")
}

/// Batched forward. Ties resolve to the lowest index.
pub fn maxpool1d_into(
    input: &[f64],
    batch: usize,
    channels: usize,
    len: usize,
    pool: usize,
    out: &mut [f64],
    argmax: &mut [usize],
) {
    let out_len = pooled_len(len, pool).expect("invalid pool size");
    assert_eq!(input.len(), batch * channels * len);
    assert_eq!(out.len(), batch * channels * out_len);
    assert_eq!(argmax.len(), out.len());
    for row in 0..batch * channels {
        let src = &input[row * len..(row + 1) * len];
        let base = (row % channels) * len;
        for t in 0..out_len {
            let start = t * pool;
            let mut best = start;
            for i in start + 1..start + pool {
                if src[i] > src[best] {
                    best = i;
                }
            }
            out[row * out_len + t] = src[best];
            argmax[row * out_len + t] = base + best;
        }
    }
}

/// Batched backward; `dinput` is overwritten. Argmax offsets are per sample.
pub fn maxpool1d_backward_into(argmax: &[usize], batch: usize, upstream: &[f64], dinput: &mut [f64]) {
    assert_eq!(argmax.len(), upstream.len());
    dinput.fill(0.0);
    let in_size = dinput.len() / batch.max(1);
    let out_size = upstream.len() / batch.max(1);
    for b in 0..batch {
        let dst = &mut dinput[b * in_size..(b + 1) * in_size];
        let up = &upstream[b * out_size..(b + 1) * out_size];
        for (&i, &u) in argmax[b * out_size..(b + 1) * out_size].iter().zip(up) {
            dst[i] += u;
        }
    }
}
