use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Geometry of a parameterised layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum LayerKind {
    /// Weights are `outputs × inputs`, row-major.
    Dense { inputs: usize, outputs: usize },
    /// Weights are `out_channels × in_channels × kernel`.
    Conv1d { in_channels: usize, out_channels: usize, kernel: usize },
}

impl LayerKind {
    pub fn weight_len(&self) -> usize {
        match *self {
            LayerKind::Dense { inputs, outputs } => inputs * outputs,
            LayerKind::Conv1d { in_channels, out_channels, kernel } => in_channels * out_channels * kernel,
        }
    }

    pub fn bias_len(&self) -> usize {
        match *self {
            LayerKind::Dense { outputs, .. } => outputs,
            LayerKind::Conv1d { out_channels, .. } => out_channels,
        }
    }

    pub fn fan_in(&self) -> usize {
        match *self {
            LayerKind::Dense { inputs, .. } => inputs,
            LayerKind::Conv1d { in_channels, kernel, .. } => in_channels * kernel,
        }
    }
}

/// Weights and bias of one layer. Gradients use the same type.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub kind: LayerKind,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LayerParams {
    pub fn new(kind: LayerKind, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        let params = Self { kind, weights, bias };
        params.validate()?;
        Ok(params)
    }

    pub fn zeros(kind: LayerKind) -> Self {
        Self { kind, weights: vec![0.0; kind.weight_len()], bias: vec![0.0; kind.bias_len()] }
    }

    pub fn dense(outputs: usize, inputs: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        Self::new(LayerKind::Dense { inputs, outputs }, weights, bias)
    }

    pub fn conv1d(out_channels: usize, in_channels: usize, kernel: usize, weights: Vec<f64>, bias: Vec<f64>) -> Result<Self> {
        Self::new(LayerKind::Conv1d { in_channels, out_channels, kernel }, weights, bias)
    }

    /// Uniform in ±1/√fan_in for weights and bias.
    pub fn uniform_init<R: Rng + ?Sized>(kind: LayerKind, rng: &mut R) -> Self {
        let bound = 1.0 / (kind.fan_in() as f64).sqrt();
        let mut draw = |n: usize| (0..n).map(|_| rng.gen_range(-bound..bound)).collect::<Vec<_>>();
        let weights = draw(kind.weight_len());
        let bias = draw(kind.bias_len());
        Self { kind, weights, bias }
    }

    pub fn validate(&self) -> Result<()> {
        if self.kind.weight_len() == 0 || self.kind.bias_len() == 0 {
            return Err(Error::config(format!("degenerate layer {:?}", self.kind)));
        }
        if self.weights.len() != self.kind.weight_len() || self.bias.len() != self.kind.bias_len() {
            return Err(Error::config(format!(
                "layer {:?} expects {} weights and {} biases, got {} and {}",
                self.kind,
                self.kind.weight_len(),
                self.kind.bias_len(),
                self.weights.len(),
                self.bias.len()
            )));
        }
        if !self.is_finite() {
            return Err(Error::config(format!("non-finite parameter in layer {:?}", self.kind)));
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|v| v.is_finite())
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn fill_zero(&mut self) {
        self.weights.fill(0.0);
        self.bias.fill(0.0);
    }
}

/// One gradient tensor per layer, shape-matched to the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSet {
    pub layers: Vec<LayerParams>,
}

impl GradientSet {
    pub fn zeros_like(params: &[LayerParams]) -> Self {
        Self { layers: params.iter().map(|p| LayerParams::zeros(p.kind)).collect() }
    }

    pub fn matches(&self, params: &[LayerParams]) -> bool {
        self.layers.len() == params.len() && self.layers.iter().zip(params).all(|(g, p)| g.kind == p.kind)
    }

    pub fn is_finite(&self) -> bool {
        self.layers.iter().all(LayerParams::is_finite)
    }

    pub fn fill_zero(&mut self) {
        self.layers.iter_mut().for_each(LayerParams::fill_zero);
    }

    /// Flat iterator over every gradient entry, weights before bias per layer.
    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.layers.iter().flat_map(|l| l.weights.iter().chain(&l.bias).copied())
    }
}
