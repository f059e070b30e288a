use serde::{Deserialize, Serialize};

use crate::nn::{GradientSet, LayerParams};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Decoupled: applied to the parameters before the moment update.
    pub weight_decay: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { lr: 1e-4, beta1: 0.9, beta2: 0.999, eps: 1e-8, weight_decay: 1e-4 }
    }
}

impl AdamConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.lr > 0.0
            && (0.0..1.0).contains(&self.beta1)
            && (0.0..1.0).contains(&self.beta2)
            && self.eps > 0.0
            && self.weight_decay >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid Adam settings {self:?}")))
        }
    }
}

/// Moment accumulators, one pair per parameter tensor.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState {
    pub config: AdamConfig,
    pub m: GradientSet,
    pub v: GradientSet,
    pub t: u64,
}

impl AdamState {
    pub fn new(params: &[LayerParams], config: AdamConfig) -> Self {
        Self { config, m: GradientSet::zeros_like(params), v: GradientSet::zeros_like(params), t: 0 }
    }
}

fn update(p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64], cfg: &AdamConfig, c1: f64, c2: f64) {
    let decay = 1.0 - cfg.lr * cfg.weight_decay;
    for i in 0..p.len() {
        p[i] *= decay;
        m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
        v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
        let m_hat = m[i] / c1;
        let v_hat = v[i] / c2;
        p[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
    }
}

/// One Adam step with decoupled weight decay.
pub fn adam_step(params: &mut [LayerParams], grads: &GradientSet, state: &mut AdamState) -> Result<()> {
    if !grads.matches(params) || !state.m.matches(params) || !state.v.matches(params) {
        return Err(Error::config("gradient or optimizer state does not match the parameters"));
    }
    state.t += 1;
    let cfg = state.config;
    let t = state.t as i32;
    let c1 = 1.0 - cfg.beta1.powi(t);
    let c2 = 1.0 - cfg.beta2.powi(t);
    for (((p, g), m), v) in params.iter_mut().zip(&grads.layers).zip(&mut state.m.layers).zip(&mut state.v.layers) {
        update(&mut p.weights, &g.weights, &mut m.weights, &mut v.weights, &cfg, c1, c2);
        update(&mut p.bias, &g.bias, &mut m.bias, &mut v.bias, &cfg, c1, c2);
    }
    Ok(())
}
