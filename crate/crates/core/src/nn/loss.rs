use super::{DenseVector, Tensor};
use crate::{Error, Result};

/// `x_i − max(x) − ln Σ_j exp(x_j − max(x))`.
pub fn log_softmax(input: &DenseVector) -> DenseVector {
    let mut out = input.clone();
    log_softmax_in_place(out.values_mut());
    out
}

pub fn log_softmax_in_place(values: &mut [f64]) {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_sum = values.iter().map(|v| (v - max).exp()).sum::<f64>().ln();
    for v in values {
        *v -= max + log_sum;
    }
}

/// Negative log-likelihood of `target`: `−log_probs[target]`.
pub fn nll_loss(log_probs: &DenseVector, target: usize) -> Result<f64> {
    log_probs
        .values()
        .get(target)
        .map(|lp| -lp)
        .ok_or_else(|| Error::Input(format!("target class {target} out of range for {} classes", log_probs.size())))
}

/// Gradient of `nll_loss ∘ log_softmax` with respect to the logits:
/// `softmax − one_hot(target)`.
pub fn nll_logit_grad(log_probs: &DenseVector, target: usize) -> Result<DenseVector> {
    if target >= log_probs.size() {
        return Err(Error::Input(format!("target class {target} out of range for {} classes", log_probs.size())));
    }
    let mut grad: Vec<f64> = log_probs.values().iter().map(|lp| lp.exp()).collect();
    grad[target] -= 1.0;
    Ok(DenseVector::new(grad))
}
