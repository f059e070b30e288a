use super::gemm::{gemm, Layout};
use super::{DenseVector, LayerKind, LayerParams, Tensor};
use crate::{Error, Result};

fn dense_dims(params: &LayerParams) -> Result<(usize, usize)> {
    match params.kind {
        LayerKind::Dense { inputs, outputs } => Ok((inputs, outputs)),
        other => Err(Error::config(format!("expected a dense layer, got {other:?}"))),
    }
}

/// `output_i = Σ_j W_ij · input_j + b_i`.
pub fn fc_forward(input: &DenseVector, params: &LayerParams) -> Result<DenseVector> {
    let (inputs, outputs) = dense_dims(params)?;
    if input.size() != inputs {
        return Err(Error::config(format!("dense layer expects {inputs} inputs, got {}", input.size())));
    }
    let mut out = vec![0.0; outputs];
    fc_forward_into(params, input.values(), 1, &mut out);
    Ok(DenseVector::new(out))
}

/// Returns the parameter gradient and the gradient with respect to `input`.
pub fn fc_backward(
    input: &DenseVector,
    params: &LayerParams,
    upstream: &DenseVector,
) -> Result<(LayerParams, DenseVector)> {
    let (inputs, outputs) = dense_dims(params)?;
    if input.size() != inputs || upstream.size() != outputs {
        return Err(Error::config(format!(
            "dense backward expects input {inputs} / upstream {outputs}, got {} / {}",
            input.size(),
            upstream.size()
        )));
    }
    let mut grad = LayerParams::zeros(params.kind);
    let mut dinput = vec![0.0; inputs];
    fc_backward_into(params, input.values(), 1, upstream.values(), &mut grad, Some(&mut dinput));
    Ok((grad, DenseVector::new(dinput)))
}

/// Batched forward over `batch` row-major input rows. Panics on shape mismatch.
pub fn fc_forward_into(params: &LayerParams, input: &[f64], batch: usize, out: &mut [f64]) {
    let LayerKind::Dense { inputs, outputs } = params.kind else {
        panic!("fc_forward_into on {:?}", params.kind)
    };
    assert_eq!(input.len(), batch * inputs);
    assert_eq!(out.len(), batch * outputs);
    for row in out.chunks_exact_mut(outputs) {
        row.copy_from_slice(&params.bias);
    }
    gemm(
        1.0,
        input,
        Layout::row_major(batch, inputs),
        &params.weights,
        Layout::transposed(outputs, inputs),
        1.0,
        out,
        Layout::row_major(batch, outputs),
    );
}

/// Batched backward. Parameter gradients are accumulated into `grad`;
/// `dinput`, when requested, is overwritten.
pub fn fc_backward_into(
    params: &LayerParams,
    input: &[f64],
    batch: usize,
    upstream: &[f64],
    grad: &mut LayerParams,
    dinput: Option<&mut [f64]>,
) {
    let LayerKind::Dense { inputs, outputs } = params.kind else {
        panic!("fc_backward_into on {:?}", params.kind)
    };
    assert_eq!(grad.kind, params.kind);
    assert_eq!(input.len(), batch * inputs);
    assert_eq!(upstream.len(), batch * outputs);
    gemm(
        1.0,
        upstream,
        Layout::transposed(batch, outputs),
        input,
        Layout::row_major(batch, inputs),
        1.0,
        &mut grad.weights,
        Layout::row_major(outputs, inputs),
    );
    for row in upstream.chunks_exact(outputs) {
        for (b, u) in grad.bias.iter_mut().zip(row) {
            *b += u;
        }
    }
    if let Some(dinput) = dinput {
        assert_eq!(dinput.len(), batch * inputs);
        gemm(
            1.0,
            upstream,
            Layout::row_major(batch, outputs),
            &params.weights,
            Layout::row_major(outputs, inputs),
            0.0,
            dinput,
            Layout::row_major(batch, inputs),
        );
    }
}
