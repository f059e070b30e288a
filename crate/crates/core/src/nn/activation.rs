use rand::Rng;

use super::Tensor;
use crate::{Error, Result};

pub fn relu<T: Tensor + Clone>(input: &T) -> T {
    let mut out = input.clone();
    relu_in_place(out.values_mut());
    out
}

pub fn relu_in_place(values: &mut [f64]) {
    for v in values {
        *v = v.max(0.0);
    }
}

/// Passes `upstream` where `input > 0`; the gradient at exactly 0 is 0.
pub fn relu_backward<T: Tensor + Clone>(input: &T, upstream: &T) -> T {
    let mut out = upstream.clone();
    relu_backward_in_place(input.values(), out.values_mut());
    out
}

pub fn relu_backward_in_place(input: &[f64], grad: &mut [f64]) {
    assert_eq!(input.len(), grad.len(), "relu_backward shape mismatch");
    for (g, &x) in grad.iter_mut().zip(input) {
        if x <= 0.0 {
            *g = 0.0;
        }
    }
}

/// Inverted-dropout multipliers: 0 with probability `rate`, else `1/(1-rate)`.
pub fn dropout_mask<R: Rng + ?Sized>(len: usize, rate: f64, rng: &mut R) -> Vec<f64> {
    let keep = 1.0 / (1.0 - rate);
    (0..len).map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep }).collect()
}

pub fn dropout<T: Tensor + Clone, R: Rng + ?Sized>(input: &T, rate: f64, training: bool, rng: &mut R) -> Result<T> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::config(format!("dropout rate must be in [0, 1), got {rate}")));
    }
    let mut out = input.clone();
    if training && rate > 0.0 {
        let mask = dropout_mask(out.values().len(), rate, rng);
        out.values_mut().iter_mut().zip(mask).for_each(|(v, m)| *v *= m);
    }
    Ok(out)
}
