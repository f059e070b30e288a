use serde::{Deserialize, Serialize};

use crate::nn::{conv_output_len, pooled_len, LayerKind};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadMode {
    Single,
    /// Separate conv stacks for the first and second half of the input
    /// channels (accelerometer, gyroscope).
    TwoHead,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaitNetConfig {
    pub num_classes: usize,
    /// Channels of the full input window; each head of a two-head model sees half.
    pub input_channels: usize,
    pub window_len: usize,
    pub conv_channels: [usize; 2],
    pub kernel_size: usize,
    pub pool_size: usize,
    pub fc_sizes: [usize; 2],
    pub dropout_rate: f64,
    pub head_mode: HeadMode,
}

impl Default for GaitNetConfig {
    fn default() -> Self {
        Self {
            num_classes: 3,
            input_channels: 6,
            window_len: 120,
            conv_channels: [32, 64],
            kernel_size: 3,
            pool_size: 2,
            fc_sizes: [512, 128],
            dropout_rate: 0.5,
            head_mode: HeadMode::Single,
        }
    }
}

/// Sequence lengths after each conv and pool stage of one head.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StageLengths {
    pub conv1: usize,
    pub pool1: usize,
    pub conv2: usize,
    pub pool2: usize,
}

impl GaitNetConfig {
    pub fn with_classes(num_classes: usize) -> Self {
        Self { num_classes, ..Self::default() }
    }

    pub fn heads(&self) -> usize {
        match self.head_mode {
            HeadMode::Single => 1,
            HeadMode::TwoHead => 2,
        }
    }

    pub fn head_channels(&self) -> Result<usize> {
        match self.head_mode {
            HeadMode::Single => Ok(self.input_channels),
            HeadMode::TwoHead if self.input_channels % 2 == 0 => Ok(self.input_channels / 2),
            HeadMode::TwoHead => Err(Error::config(format!(
                "two-head model needs an even channel count, got {}",
                self.input_channels
            ))),
        }
    }

    pub fn stage_lengths(&self) -> Result<StageLengths> {
        let fail = |stage: &str, len: usize| {
            Error::config(format!(
                "window {} with kernel {} and pool {}: {stage} stage has no output (input length {len})",
                self.window_len, self.kernel_size, self.pool_size
            ))
        };
        let conv1 = conv_output_len(self.window_len, self.kernel_size).ok_or_else(|| fail("conv1", self.window_len))?;
        let pool1 = pooled_len(conv1, self.pool_size).filter(|&l| l > 0).ok_or_else(|| fail("pool1", conv1))?;
        let conv2 = conv_output_len(pool1, self.kernel_size).ok_or_else(|| fail("conv2", pool1))?;
        let pool2 = pooled_len(conv2, self.pool_size).filter(|&l| l > 0).ok_or_else(|| fail("pool2", conv2))?;
        Ok(StageLengths { conv1, pool1, conv2, pool2 })
    }

    /// Features produced by one conv head.
    pub fn head_flatten_dim(&self) -> Result<usize> {
        Ok(self.conv_channels[1] * self.stage_lengths()?.pool2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.num_classes) {
            return Err(Error::config(format!("num_classes must be 2 or 3, got {}", self.num_classes)));
        }
        if self.input_channels == 0 || self.conv_channels.contains(&0) || self.fc_sizes.contains(&0) {
            return Err(Error::config("layer widths must be positive"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::config(format!("dropout rate must be in [0, 1), got {}", self.dropout_rate)));
        }
        self.head_channels()?;
        self.stage_lengths()?;
        Ok(())
    }

    /// Layer geometry in parameter order: per head (conv1, conv2), then fc1..fc3.
    pub fn layer_kinds(&self) -> Result<Vec<LayerKind>> {
        self.validate()?;
        let head_in = self.head_channels()?;
        let mut kinds = Vec::new();
        for _ in 0..self.heads() {
            kinds.push(LayerKind::Conv1d {
                in_channels: head_in,
                out_channels: self.conv_channels[0],
                kernel: self.kernel_size,
            });
            kinds.push(LayerKind::Conv1d {
                in_channels: self.conv_channels[0],
                out_channels: self.conv_channels[1],
                kernel: self.kernel_size,
            });
        }
        let flat = flatten_dim(self)?;
        kinds.push(LayerKind::Dense { inputs: flat, outputs: self.fc_sizes[0] });
        kinds.push(LayerKind::Dense { inputs: self.fc_sizes[0], outputs: self.fc_sizes[1] });
        kinds.push(LayerKind::Dense { inputs: self.fc_sizes[1], outputs: self.num_classes });
        Ok(kinds)
    }

    pub fn parameter_count(&self) -> Result<usize> {
        Ok(self.layer_kinds()?.iter().map(|k| k.weight_len() + k.bias_len()).sum())
    }
}

/// Width of the dense stack's input: per-head features summed over heads.
pub fn flatten_dim(config: &GaitNetConfig) -> Result<usize> {
    config.head_channels()?;
    Ok(config.heads() * config.head_flatten_dim()?)
}
