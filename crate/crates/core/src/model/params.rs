use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GaitNetConfig, HeadMode};
use crate::nn::{GradientSet, LayerParams};
use crate::{Error, Result};

/// All weights and biases of a GaitNet, ordered as
/// [`GaitNetConfig::layer_kinds`]: per head (conv1, conv2), then fc1, fc2, fc3.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams {
    pub config: GaitNetConfig,
    pub layers: Vec<LayerParams>,
}

impl ModelParams {
    /// Uniform ±1/√fan_in initialisation from a seed.
    pub fn init(config: &GaitNetConfig, seed: u64) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let layers = config
            .layer_kinds()?
            .into_iter()
            .map(|kind| LayerParams::uniform_init(kind, &mut rng))
            .collect();
        Ok(Self { config: config.clone(), layers })
    }

    pub fn zeros(config: &GaitNetConfig) -> Result<Self> {
        let layers = config.layer_kinds()?.into_iter().map(LayerParams::zeros).collect();
        Ok(Self { config: config.clone(), layers })
    }

    pub fn from_layers(config: GaitNetConfig, layers: Vec<LayerParams>) -> Result<Self> {
        let params = Self { config, layers };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let kinds = self.config.layer_kinds()?;
        if kinds.len() != self.layers.len() {
            return Err(Error::config(format!(
                "config implies {} layers, params hold {}",
                kinds.len(),
                self.layers.len()
            )));
        }
        for (kind, layer) in kinds.iter().zip(&self.layers) {
            if *kind != layer.kind {
                return Err(Error::config(format!("layer {:?} does not match config {kind:?}", layer.kind)));
            }
            layer.validate()?;
        }
        Ok(())
    }

    pub fn parameter_count(&self) -> usize {
        self.layers.iter().map(LayerParams::parameter_count).sum()
    }

    pub fn zero_gradients(&self) -> GradientSet {
        GradientSet::zeros_like(&self.layers)
    }

    /// `(conv1, conv2)` of head `h`.
    pub(crate) fn head(&self, h: usize) -> (&LayerParams, &LayerParams) {
        (&self.layers[2 * h], &self.layers[2 * h + 1])
    }

    /// Index of the first dense layer.
    pub(crate) fn dense_offset(&self) -> usize {
        2 * self.config.heads()
    }
}

/// Two-head parameters: one conv stack per half of the input channels, a
/// shared dense stack whose input is the concatenation of both heads.
pub fn build_two_head(config: &GaitNetConfig, seed: u64) -> Result<ModelParams> {
    if config.head_mode != HeadMode::TwoHead {
        return Err(Error::config("build_two_head needs head_mode = two_head"));
    }
    ModelParams::init(config, seed)
}
