use std::collections::BTreeMap;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::preprocess::trim_with;
use super::{
    load_recording, merge_all_placements, window_series, ClinicalClass, DatasetManifest, DogId, ImuRecording,
    LabeledWindow, Placement, PlacementSelector, Protocol, TaskSpec, TrimConfig,
};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PreprocessConfig {
    pub window: usize,
    pub stride: usize,
    pub trim: TrimConfig,
}

impl Default for PreprocessConfig {
    fn default() -> Self {
        Self { window: 120, stride: 5, trim: TrimConfig::default() }
    }
}

/// Windows of one experiment cell plus the dogs eligible for leave-one-out.
#[derive(Clone, Debug, Default)]
pub struct CellData {
    pub windows: Vec<LabeledWindow>,
    /// Every dog of the task's class domain, in id order, whether or not it
    /// contributed windows to this cell.
    pub dogs: Vec<DogId>,
}

impl CellData {
    pub fn class_counts(&self, num_classes: usize) -> Vec<usize> {
        let mut counts = vec![0; num_classes];
        for w in &self.windows {
            counts[w.label] += 1;
        }
        counts
    }
}

/// Trimmed recordings ready to be cut into cells.
#[derive(Clone, Debug)]
pub struct Corpus {
    pub recordings: Vec<ImuRecording>,
    pub dog_classes: BTreeMap<DogId, ClinicalClass>,
    /// Human-readable reasons for recordings dropped during preprocessing.
    pub excluded: Vec<String>,
    pub preprocess: PreprocessConfig,
}

impl Corpus {
    pub fn from_recordings(recordings: Vec<ImuRecording>, preprocess: PreprocessConfig) -> Result<Self> {
        if preprocess.window == 0 || preprocess.stride == 0 {
            return Err(Error::config("window and stride must be positive"));
        }
        let mut dog_classes = BTreeMap::new();
        let mut kept = Vec::new();
        let mut excluded = Vec::new();
        for rec in recordings {
            if let Some(prev) = dog_classes.insert(rec.dog_id.clone(), rec.class) {
                if prev != rec.class {
                    return Err(Error::Input(format!("dog {} labelled both {prev} and {}", rec.dog_id, rec.class)));
                }
            }
            match trim_with(&rec, &preprocess.trim) {
                Ok(t) if t.len() >= preprocess.window => kept.push(t),
                Ok(t) => {
                    let reason = format!("{}: {} samples after trimming, below window {}", t.describe(), t.len(), preprocess.window);
                    warn!("{reason}; excluded");
                    excluded.push(reason);
                }
                Err(Error::EmptyRecording(d)) => {
                    let reason = format!("{d}: no active span");
                    warn!("{reason}; excluded");
                    excluded.push(reason);
                }
                Err(e) => return Err(e),
            }
        }
        Ok(Self { recordings: kept, dog_classes, excluded, preprocess })
    }

    pub fn load(manifest: &DatasetManifest, preprocess: PreprocessConfig) -> Result<Self> {
        let recordings = manifest
            .entries
            .iter()
            .map(|e| load_recording(&manifest.resolve(e), e))
            .collect::<Result<Vec<_>>>()?;
        info!("loaded {} recordings", recordings.len());
        Self::from_recordings(recordings, preprocess)
    }

    /// Dogs whose class is inside the task's domain, in id order.
    pub fn task_dogs(&self, task: &TaskSpec) -> Vec<DogId> {
        self.dog_classes.iter().filter(|(_, &c)| task.label(c).is_some()).map(|(d, _)| d.clone()).collect()
    }

    fn placement_windows(&self, task: &TaskSpec, placement: Placement, protocol: Protocol) -> Vec<LabeledWindow> {
        self.recordings
            .iter()
            .filter(|r| r.placement == placement && r.protocol == protocol)
            .flat_map(|r| window_series(r, self.preprocess.window, self.preprocess.stride, task))
            .collect()
    }

    /// Windows for one task × placement × protocol cell. `All` pools the
    /// three placements.
    pub fn cell(&self, task: &TaskSpec, placement: PlacementSelector, protocol: Protocol) -> CellData {
        let windows = match placement {
            PlacementSelector::All => {
                merge_all_placements(Placement::ALL.iter().map(|&p| self.placement_windows(task, p, protocol)))
            }
            single => {
                let p = Placement::ALL.iter().copied().find(|&p| single.matches(p)).expect("single placement");
                self.placement_windows(task, p, protocol)
            }
        };
        CellData { windows, dogs: self.task_dogs(task) }
    }
}
