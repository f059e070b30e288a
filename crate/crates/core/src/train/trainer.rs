use log::{debug, info, warn};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{adam_step, evaluate, AdamConfig, AdamState, F1Average};
use crate::data::LabeledWindow;
use crate::model::{loss_and_gradient, GaitNetConfig, ModelParams};
use crate::nn::FeatureMap;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub restarts: usize,
    pub batch_size: usize,
    /// Restart `r` trains with seed `seed + r`.
    pub seed: u64,
    pub adam: AdamConfig,
    /// Share of the training windows held out to choose between restarts.
    pub validation_fraction: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self { epochs: 60, restarts: 60, batch_size: 32, seed: 0, adam: AdamConfig::default(), validation_fraction: 0.15 }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.restarts == 0 || self.batch_size == 0 {
            return Err(Error::config("epochs, restarts and batch size must be at least 1"));
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return Err(Error::config("validation fraction must lie in (0, 1)"));
        }
        self.adam.validate()
    }
}

/// Mean training loss per epoch.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TrainingCurve {
    pub epoch_loss: Vec<f64>,
}

impl TrainingCurve {
    pub fn final_loss(&self) -> Option<f64> {
        self.epoch_loss.last().copied()
    }
}

fn check_training_set(train: &[LabeledWindow], num_classes: usize) -> Result<()> {
    if train.is_empty() {
        return Err(Error::Input("empty training set".into()));
    }
    match train.iter().find(|w| w.label >= num_classes) {
        Some(w) => Err(Error::Input(format!("label {} outside {num_classes} classes", w.label))),
        None => Ok(()),
    }
}

/// Shuffled mini-batch training from a fresh seeded initialization.
pub fn train_once(
    train: &[LabeledWindow],
    model: &GaitNetConfig,
    config: &TrainConfig,
    seed: u64,
) -> Result<(ModelParams, TrainingCurve)> {
    config.validate()?;
    check_training_set(train, model.num_classes)?;
    let mut params = ModelParams::init(model, seed)?;
    let mut state = AdamState::new(&params.layers, config.adam);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut curve = TrainingCurve::default();
    let mut inputs: Vec<&FeatureMap> = Vec::with_capacity(config.batch_size);
    let mut targets = Vec::with_capacity(config.batch_size);
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for batch in order.chunks(config.batch_size) {
            inputs.clear();
            targets.clear();
            for &i in batch {
                inputs.push(&train[i].values);
                targets.push(train[i].label);
            }
            let (loss, grads) = loss_and_gradient(&params, &inputs, &targets, Some(&mut rng))?;
            if !loss.is_finite() || !grads.is_finite() {
                return Err(Error::Divergence { epoch, loss });
            }
            adam_step(&mut params.layers, &grads, &mut state)?;
            total += loss * batch.len() as f64;
        }
        let mean = total / train.len() as f64;
        debug!("seed {seed} epoch {epoch}: loss {mean:.5}");
        curve.epoch_loss.push(mean);
    }
    Ok((params, curve))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestartRun {
    pub seed: u64,
    /// `None` when the run diverged.
    pub validation_accuracy: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct RestartOutcome {
    pub params: ModelParams,
    pub curve: TrainingCurve,
    pub seed: u64,
    pub validation_accuracy: f64,
    pub runs: Vec<RestartRun>,
}

/// Trains `config.restarts` seeded runs and keeps the one with the highest
/// validation accuracy; ties go to the lower seed. Test data never enters here.
pub fn train_with_restarts(
    train: &[LabeledWindow],
    validation: &[LabeledWindow],
    model: &GaitNetConfig,
    config: &TrainConfig,
) -> Result<RestartOutcome> {
    config.validate()?;
    if validation.is_empty() {
        return Err(Error::Input("empty validation set".into()));
    }
    let mut best: Option<RestartOutcome> = None;
    let mut runs = Vec::with_capacity(config.restarts);
    for r in 0..config.restarts as u64 {
        let seed = config.seed.wrapping_add(r);
        match train_once(train, model, config, seed) {
            Ok((params, curve)) => {
                let acc = evaluate(&params, validation, F1Average::Macro)?.accuracy;
                debug!("restart seed {seed}: validation accuracy {acc:.4}");
                runs.push(RestartRun { seed, validation_accuracy: Some(acc) });
                if best.as_ref().map_or(true, |b| acc > b.validation_accuracy) {
                    best = Some(RestartOutcome { params, curve, seed, validation_accuracy: acc, runs: Vec::new() });
                }
            }
            Err(Error::Divergence { epoch, loss }) => {
                warn!("restart seed {seed} diverged at epoch {epoch} (loss {loss})");
                runs.push(RestartRun { seed, validation_accuracy: None });
            }
            Err(e) => return Err(e),
        }
    }
    let mut best = best.ok_or(Error::AllRunsDiverged(config.restarts))?;
    info!("selected seed {} with validation accuracy {:.4}", best.seed, best.validation_accuracy);
    best.runs = runs;
    Ok(best)
}
