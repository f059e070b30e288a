//! GaitNet: two conv/ReLU/max-pool stages, a flatten, and three dense layers
//! ending in log-softmax. The two-head variant runs separate conv stacks on
//! the accelerometer and gyroscope channels and concatenates their features
//! before the shared dense stack.

mod checkpoint;
mod config;
mod network;
mod params;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint, CHECKPOINT_VERSION};
pub use config::{flatten_dim, GaitNetConfig, HeadMode, StageLengths};
pub use network::{argmax, backward, forward, forward_batch, loss_and_gradient, predict, predict_batch};
pub use params::{build_two_head, ModelParams};
