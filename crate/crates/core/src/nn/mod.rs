//! Layer primitives with explicit forward and backward passes.
//!
//! Every layer works on plain row-major `f64` buffers. The per-sample
//! functions (`fc_forward`, `conv1d_forward`, ...) validate shapes and return
//! owned values; the `*_into` variants are the batched kernels the model runs
//! during training and share the same arithmetic.

mod activation;
mod conv;
mod dense;
mod gemm;
mod loss;
mod params;
mod pool;
mod tensor;

pub use activation::{dropout, dropout_mask, relu, relu_backward, relu_backward_in_place, relu_in_place};
pub use conv::{conv1d_backward, conv1d_backward_into, conv1d_forward, conv1d_forward_into, conv_output_len};
pub use dense::{fc_backward, fc_backward_into, fc_forward, fc_forward_into};
pub use loss::{log_softmax, log_softmax_in_place, nll_logit_grad, nll_loss};
pub use params::{GradientSet, LayerKind, LayerParams};
pub use pool::{maxpool1d, maxpool1d_backward, maxpool1d_backward_into, maxpool1d_into, pooled_len, PoolIndices};
pub use tensor::{DenseVector, FeatureMap, Tensor};
