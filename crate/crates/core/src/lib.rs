//! Gait classification from 6-axis inertial windows.
//!
//! The crate is split by pipeline stage:
//!
//! - [`nn`]: layer primitives (dense, 1D convolution, ReLU, max-pool, dropout,
//!   log-softmax / NLL) with explicit forward and backward passes.
//! - [`model`]: the GaitNet network in single-head and accelerometer/gyroscope
//!   two-head form, plus checkpoint I/O.
//! - [`data`]: recordings, manifests, trimming, windowing, augmentation,
//!   splitting and the synthetic gait generator.
//! - [`train`]: Adam, the training loop with restarts, metrics, and the
//!   random-split / leave-one-dog-out experiment runners.

pub mod data;
pub mod error;
pub mod model;
pub mod nn;
pub mod train;

pub use error::{Error, Result};
