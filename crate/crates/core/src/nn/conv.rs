use super::gemm::{gemm, Layout};
use super::{FeatureMap, LayerKind, LayerParams, Tensor};
use crate::{Error, Result};

/// Output length of a valid (unpadded, stride 1) convolution, `None` if the
/// kernel does not fit.
pub fn conv_output_len(input_len: usize, kernel: usize) -> Option<usize> {
    (kernel >= 1 && input_len >= kernel).then(|| input_len - kernel + 1)
}

fn conv_dims(params: &LayerParams) -> Result<(usize, usize, usize)> {
    match params.kind {
        LayerKind::Conv1d { in_channels, out_channels, kernel } => Ok((in_channels, out_channels, kernel)),
        other => Err(Error::config(format!("expected a conv1d layer, got {other:?}"))),
    }
}

fn check_input(params: &LayerParams, input: &FeatureMap) -> Result<usize> {
    let (in_channels, _, kernel) = conv_dims(params)?;
    if input.channels() != in_channels {
        return Err(Error::config(format!(
            "conv1d expects {in_channels} input channels, got {}",
            input.channels()
        )));
    }
    conv_output_len(input.length(), kernel).ok_or_else(|| {
        Error::config(format!("input length {} shorter than kernel {kernel}", input.length()))
    })
}

/// Valid cross-correlation, one bias per output channel.
pub fn conv1d_forward(input: &FeatureMap, params: &LayerParams) -> Result<FeatureMap> {
    let out_len = check_input(params, input)?;
    let (_, out_channels, _) = conv_dims(params)?;
    let mut out = vec![0.0; out_channels * out_len];
    let mut cols = Vec::new();
    conv1d_forward_into(params, input.values(), 1, input.length(), &mut out, &mut cols);
    FeatureMap::new(out_channels, out_len, out)
}

pub fn conv1d_backward(
    input: &FeatureMap,
    params: &LayerParams,
    upstream: &FeatureMap,
) -> Result<(LayerParams, FeatureMap)> {
    let out_len = check_input(params, input)?;
    let (_, out_channels, _) = conv_dims(params)?;
    if upstream.channels() != out_channels || upstream.length() != out_len {
        return Err(Error::config(format!(
            "conv1d upstream must be {out_channels}×{out_len}, got {}×{}",
            upstream.channels(),
            upstream.length()
        )));
    }
    let mut grad = LayerParams::zeros(params.kind);
    let mut dinput = vec![0.0; input.values().len()];
    let mut cols = Vec::new();
    conv1d_backward_into(
        params,
        input.values(),
        1,
        input.length(),
        upstream.values(),
        &mut grad,
        Some(&mut dinput),
        &mut cols,
    );
    let dinput = FeatureMap::new(input.channels(), input.length(), dinput)?;
    Ok((grad, dinput))
}

/// Unrolls one `channels × len` sample into a `(channels·kernel) × out_len` matrix.
fn im2col(sample: &[f64], channels: usize, len: usize, kernel: usize, out_len: usize, cols: &mut Vec<f64>) {
    cols.clear();
    cols.reserve(channels * kernel * out_len);
    for c in 0..channels {
        let row = &sample[c * len..(c + 1) * len];
        for j in 0..kernel {
            cols.extend_from_slice(&row[j..j + out_len]);
        }
    }
}

/// Batched forward; `input` is `batch × in_channels × in_len`, `out` is
/// `batch × out_channels × out_len`. `cols` is scratch space.
pub fn conv1d_forward_into(
    params: &LayerParams,
    input: &[f64],
    batch: usize,
    in_len: usize,
    out: &mut [f64],
    cols: &mut Vec<f64>,
) {
    let LayerKind::Conv1d { in_channels, out_channels, kernel } = params.kind else {
        panic!("conv1d_forward_into on {:?}", params.kind)
    };
    let out_len = conv_output_len(in_len, kernel).expect("kernel longer than input");
    let (in_size, out_size) = (in_channels * in_len, out_channels * out_len);
    assert_eq!(input.len(), batch * in_size);
    assert_eq!(out.len(), batch * out_size);
    let unrolled = in_channels * kernel;
    for (sample, dst) in input.chunks_exact(in_size).zip(out.chunks_exact_mut(out_size)) {
        im2col(sample, in_channels, in_len, kernel, out_len, cols);
        for (row, &b) in dst.chunks_exact_mut(out_len).zip(&params.bias) {
            row.fill(b);
        }
        gemm(
            1.0,
            &params.weights,
            Layout::row_major(out_channels, unrolled),
            cols,
            Layout::row_major(unrolled, out_len),
            1.0,
            dst,
            Layout::row_major(out_channels, out_len),
        );
    }
}

/// Batched backward. Parameter gradients accumulate into `grad`; `dinput`,
/// when requested, is overwritten with the full correlation of the upstream
/// gradient against the flipped kernels.
#[allow(clippy::too_many_arguments)]
pub fn conv1d_backward_into(
    params: &LayerParams,
    input: &[f64],
    batch: usize,
    in_len: usize,
    upstream: &[f64],
    grad: &mut LayerParams,
    mut dinput: Option<&mut [f64]>,
    cols: &mut Vec<f64>,
) {
    let LayerKind::Conv1d { in_channels, out_channels, kernel } = params.kind else {
        panic!("conv1d_backward_into on {:?}", params.kind)
    };
    assert_eq!(grad.kind, params.kind);
    let out_len = conv_output_len(in_len, kernel).expect("kernel longer than input");
    let (in_size, out_size) = (in_channels * in_len, out_channels * out_len);
    assert_eq!(input.len(), batch * in_size);
    assert_eq!(upstream.len(), batch * out_size);
    let unrolled = in_channels * kernel;
    let mut dcols = if dinput.is_some() { vec![0.0; unrolled * out_len] } else { Vec::new() };

    for b in 0..batch {
        let sample = &input[b * in_size..(b + 1) * in_size];
        let up = &upstream[b * out_size..(b + 1) * out_size];
        im2col(sample, in_channels, in_len, kernel, out_len, cols);
        gemm(
            1.0,
            up,
            Layout::row_major(out_channels, out_len),
            cols,
            Layout::transposed(unrolled, out_len),
            1.0,
            &mut grad.weights,
            Layout::row_major(out_channels, unrolled),
        );
        for (gb, row) in grad.bias.iter_mut().zip(up.chunks_exact(out_len)) {
            *gb += row.iter().sum::<f64>();
        }
        if let Some(dinput) = dinput.as_deref_mut() {
            gemm(
                1.0,
                &params.weights,
                Layout::transposed(out_channels, unrolled),
                up,
                Layout::row_major(out_channels, out_len),
                0.0,
                &mut dcols,
                Layout::row_major(unrolled, out_len),
            );
            let dx = &mut dinput[b * in_size..(b + 1) * in_size];
            dx.fill(0.0);
            for c in 0..in_channels {
                let dst = &mut dx[c * in_len..(c + 1) * in_len];
                for j in 0..kernel {
                    let src = &dcols[(c * kernel + j) * out_len..(c * kernel + j + 1) * out_len];
                    for (d, s) in dst[j..j + out_len].iter_mut().zip(src) {
                        *d += s;
                    }
                }
            }
        }
    }
}
