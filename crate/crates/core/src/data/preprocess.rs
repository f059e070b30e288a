use log::debug;
use serde::{Deserialize, Serialize};

use super::{ImuRecording, LabeledWindow, Provenance, TaskSpec, CHANNELS};
use crate::nn::FeatureMap;
use crate::{Error, Result};

/// Activity detection on the accelerometer norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrimConfig {
    /// Moving standard deviation (g) at or above which a sample counts as active.
    pub norm_threshold: f64,
    /// Consecutive active samples required to mark the start or end of activity.
    pub min_active_run: usize,
    /// Width of the centred moving window, in samples.
    pub std_window: usize,
}

impl Default for TrimConfig {
    fn default() -> Self {
        Self { norm_threshold: 0.05, min_active_run: 60, std_window: 60 }
    }
}

/// Centred moving standard deviation; the window is clipped at the edges.
pub fn moving_std(values: &[f64], window: usize) -> Vec<f64> {
    let n = values.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    // prefix sums of the centred series keep the variance free of cancellation
    let mut s1 = vec![0.0; n + 1];
    let mut s2 = vec![0.0; n + 1];
    for (i, v) in values.iter().enumerate() {
        let d = v - mean;
        s1[i + 1] = s1[i] + d;
        s2[i + 1] = s2[i] + d * d;
    }
    let half = window / 2;
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + window - half).min(n);
            let k = (hi - lo) as f64;
            let m = (s1[hi] - s1[lo]) / k;
            ((s2[hi] - s2[lo]) / k - m * m).max(0.0).sqrt()
        })
        .collect()
}

/// Drops the still lead-in and lead-out. Activity starts at the first run of
/// `min_active_run` samples whose accel-norm moving std reaches the
/// threshold and ends at the last such run; everything in between is kept.
pub fn trim_inactive(recording: &ImuRecording, norm_threshold: f64, min_active_run: usize) -> Result<ImuRecording> {
    trim_with(recording, &TrimConfig { norm_threshold, min_active_run, ..TrimConfig::default() })
}

pub(crate) fn trim_with(recording: &ImuRecording, cfg: &TrimConfig) -> Result<ImuRecording> {
    if cfg.norm_threshold <= 0.0 || cfg.min_active_run == 0 || cfg.std_window == 0 {
        return Err(Error::config("trim threshold, run length and window must be positive"));
    }
    let norms: Vec<f64> = recording
        .samples
        .iter()
        .map(|s| (s[0] * s[0] + s[1] * s[1] + s[2] * s[2]).sqrt())
        .collect();
    let active: Vec<bool> = moving_std(&norms, cfg.std_window).iter().map(|&s| s >= cfg.norm_threshold).collect();

    let run = cfg.min_active_run;
    let mut start = None;
    let mut streak = 0;
    for (i, &a) in active.iter().enumerate() {
        streak = if a { streak + 1 } else { 0 };
        if streak == run {
            start = Some(i + 1 - run);
            break;
        }
    }
    let Some(start) = start else {
        return Err(Error::EmptyRecording(recording.describe()));
    };
    let mut end = start + run;
    streak = 0;
    for i in (0..active.len()).rev() {
        streak = if active[i] { streak + 1 } else { 0 };
        if streak == run {
            end = i + run;
            break;
        }
    }
    let mut trimmed = recording.clone();
    trimmed.samples = recording.samples[start..end].to_vec();
    Ok(trimmed)
}

/// Slices `window`-long windows every `stride` samples starting at 0. Yields
/// nothing when the recording is shorter than one window or its class is
/// outside the task.
pub fn window_series(recording: &ImuRecording, window: usize, stride: usize, task: &TaskSpec) -> Vec<LabeledWindow> {
    assert!(window >= 1 && stride >= 1, "window and stride must be positive");
    let Some(label) = task.label(recording.class) else {
        return Vec::new();
    };
    let len = recording.len();
    if window > len {
        debug!("{}: {len} samples, shorter than window {window}; skipped", recording.describe());
        return Vec::new();
    }
    let count = (len - window) / stride + 1;
    (0..count)
        .map(|k| {
            let start = k * stride;
            let slice = &recording.samples[start..start + window];
            let mut values = Vec::with_capacity(CHANNELS * window);
            for c in 0..CHANNELS {
                values.extend(slice.iter().map(|s| s[c]));
            }
            LabeledWindow {
                values: FeatureMap::new(CHANNELS, window, values).expect("non-empty window"),
                label,
                provenance: Provenance {
                    dog_id: recording.dog_id.clone(),
                    placement: recording.placement,
                    protocol: recording.protocol,
                    start,
                    augmented: None,
                },
            }
        })
        .collect()
}
