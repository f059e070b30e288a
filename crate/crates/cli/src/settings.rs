use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use gaitnet::data::{GeneratorSpec, PlacementSelector, PreprocessConfig, Protocol, Task, TrimConfig};
use gaitnet::model::HeadMode;
use gaitnet::train::{AdamConfig, ExperimentConfig, F1Average, TrainConfig};
use serde::{Deserialize, Serialize};

/// Flat `key = value` settings. Used both as the `--config` file and, with
/// every field filled in, as the `run.toml` written next to each run's outputs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub tool_version: Option<String>,
    pub command: Option<String>,
    /// Files the run produced, relative to its output directory.
    pub artifacts: Option<Vec<String>>,
    pub manifest: Option<PathBuf>,
    pub task: Option<Task>,
    pub placement: Option<PlacementSelector>,
    pub protocol: Option<Protocol>,
    pub seed: Option<u64>,
    pub epochs: Option<usize>,
    pub restarts: Option<usize>,
    pub batch_size: Option<usize>,
    pub lr: Option<f64>,
    pub weight_decay: Option<f64>,
    pub validation_fraction: Option<f64>,
    pub test_fraction: Option<f64>,
    pub dropout_rate: Option<f64>,
    /// Degrees; absent means no augmentation.
    pub augment: Option<f64>,
    pub two_head: Option<bool>,
    pub f1_average: Option<F1Average>,
    pub min_class_windows: Option<usize>,
    pub window: Option<usize>,
    pub stride: Option<usize>,
    pub trim_threshold: Option<f64>,
    pub trim_min_run: Option<usize>,
    pub trim_window: Option<usize>,
    /// Synthetic cohort parameters for `synth`.
    pub generator: Option<GeneratorSpec>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = toml::to_string(self).context("serializing run manifest")?;
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))
    }

    /// Fields set in `over` win.
    pub fn overlay(mut self, over: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if over.$f.is_some() { self.$f = over.$f; } )* };
        }
        take!(
            tool_version, command, manifest, task, placement, protocol, seed, epochs, restarts, batch_size, lr,
            weight_decay, validation_fraction, test_fraction, dropout_rate, augment, two_head, f1_average,
            min_class_windows, window, stride, trim_threshold, trim_min_run, trim_window, generator, artifacts
        );
        self
    }
}

/// Every setting with defaults applied.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolved {
    pub manifest: Option<PathBuf>,
    pub experiment: ExperimentConfig,
    pub preprocess: PreprocessConfig,
}

impl Resolved {
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let d_exp = ExperimentConfig::default();
        let d_train = TrainConfig::default();
        let d_adam = AdamConfig::default();
        let d_pre = PreprocessConfig::default();
        let d_trim = TrimConfig::default();
        let experiment = ExperimentConfig {
            task: cfg.task.unwrap_or(d_exp.task),
            placement: cfg.placement.unwrap_or(d_exp.placement),
            protocol: cfg.protocol.unwrap_or(d_exp.protocol),
            head_mode: if cfg.two_head.unwrap_or(false) { HeadMode::TwoHead } else { HeadMode::Single },
            augment: cfg.augment,
            test_fraction: cfg.test_fraction.unwrap_or(d_exp.test_fraction),
            dropout_rate: cfg.dropout_rate.unwrap_or(d_exp.dropout_rate),
            f1_average: cfg.f1_average.unwrap_or(d_exp.f1_average),
            min_class_windows: cfg.min_class_windows.unwrap_or(d_exp.min_class_windows),
            train: TrainConfig {
                epochs: cfg.epochs.unwrap_or(d_train.epochs),
                restarts: cfg.restarts.unwrap_or(d_train.restarts),
                batch_size: cfg.batch_size.unwrap_or(d_train.batch_size),
                seed: cfg.seed.unwrap_or(d_train.seed),
                adam: AdamConfig {
                    lr: cfg.lr.unwrap_or(d_adam.lr),
                    weight_decay: cfg.weight_decay.unwrap_or(d_adam.weight_decay),
                    ..d_adam
                },
                validation_fraction: cfg.validation_fraction.unwrap_or(d_train.validation_fraction),
            },
        };
        experiment.validate()?;
        let preprocess = PreprocessConfig {
            window: cfg.window.unwrap_or(d_pre.window),
            stride: cfg.stride.unwrap_or(d_pre.stride),
            trim: TrimConfig {
                norm_threshold: cfg.trim_threshold.unwrap_or(d_trim.norm_threshold),
                min_active_run: cfg.trim_min_run.unwrap_or(d_trim.min_active_run),
                std_window: cfg.trim_window.unwrap_or(d_trim.std_window),
            },
        };
        if experiment.augment.is_some_and(|a| a == 0.0) {
            bail!("--augment 0 duplicates every training window; omit the flag instead");
        }
        Ok(Self { manifest: cfg.manifest.clone(), experiment, preprocess })
    }

    /// The fully materialised settings, suitable for replay via `--config`.
    pub fn to_run_config(&self, command: &str, artifacts: Vec<String>) -> RunConfig {
        let e = &self.experiment;
        RunConfig {
            tool_version: Some(env!("CARGO_PKG_VERSION").to_string()),
            command: Some(command.to_string()),
            artifacts: Some(artifacts),
            manifest: self.manifest.clone(),
            task: Some(e.task),
            placement: Some(e.placement),
            protocol: Some(e.protocol),
            seed: Some(e.train.seed),
            epochs: Some(e.train.epochs),
            restarts: Some(e.train.restarts),
            batch_size: Some(e.train.batch_size),
            lr: Some(e.train.adam.lr),
            weight_decay: Some(e.train.adam.weight_decay),
            validation_fraction: Some(e.train.validation_fraction),
            test_fraction: Some(e.test_fraction),
            dropout_rate: Some(e.dropout_rate),
            augment: e.augment,
            two_head: Some(e.head_mode == HeadMode::TwoHead),
            f1_average: Some(e.f1_average),
            min_class_windows: Some(e.min_class_windows),
            window: Some(self.preprocess.window),
            stride: Some(self.preprocess.stride),
            trim_threshold: Some(self.preprocess.trim.norm_threshold),
            trim_min_run: Some(self.preprocess.trim.min_active_run),
            trim_window: Some(self.preprocess.trim.std_window),
            generator: None,
        }
    }
}
