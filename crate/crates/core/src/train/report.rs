use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{ConfusionMatrix, F1Average};
use crate::data::{ClinicalClass, DogId, PlacementSelector, Protocol, Task};
use crate::model::HeadMode;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    RandomSplit,
    Loo,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::RandomSplit => "random_split",
            Regime::Loo => "loo",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FoldStatus {
    Completed,
    /// Every restart diverged; the fold is left out of the mean.
    Diverged,
    /// No windows for the dog, or the remaining dogs cannot cover every class.
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub dog_id: DogId,
    pub class: ClinicalClass,
    pub status: FoldStatus,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub train_windows: usize,
    pub test_windows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accuracy: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub confusion: Option<ConfusionMatrix>,
}

/// Result of one experiment cell. Field order is the serialization order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub task: Task,
    pub placement: PlacementSelector,
    pub protocol: Protocol,
    pub regime: Regime,
    pub head_mode: HeadMode,
    /// Rotation angle in degrees when training windows were augmented.
    pub augment: Option<f64>,
    pub seed: u64,
    pub f1_average: F1Average,
    /// Random split: window accuracy on the test set. Leave-one-out:
    /// unweighted mean over completed folds.
    pub accuracy: f64,
    pub f1: f64,
    /// `trace / total` of `confusion`; equals `accuracy` for a random split.
    pub pooled_accuracy: f64,
    pub classes: Vec<String>,
    /// Rows are ground truth; summed over folds for leave-one-out.
    pub confusion: ConfusionMatrix,
    pub train_windows: usize,
    pub validation_windows: usize,
    pub test_windows: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub selected_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub folds: Vec<FoldReport>,
}

impl EvalReport {
    pub fn cell_name(&self) -> String {
        format!("{}_{}_{}_{}", self.task.as_str(), self.placement.as_str(), self.protocol.as_str(), self.regime)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let report: Self = serde_json::from_str(text)?;
        report.validate()?;
        Ok(report)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
            .map_err(|e| Error::Input(format!("{}: malformed report: {e}", path.display())))
    }

    /// Internal consistency of counts and ratios.
    pub fn validate(&self) -> Result<()> {
        let n = self.classes.len();
        let bad = |m: &str| Err(Error::Input(format!("report {}: {m}", self.cell_name())));
        if self.confusion.num_classes() != n || self.confusion.counts.iter().any(|r| r.len() != n) {
            return bad("confusion matrix does not match the class list");
        }
        if self.confusion.total() != self.test_windows as u64 {
            return bad("confusion matrix total differs from the test window count");
        }
        if (self.pooled_accuracy - self.confusion.accuracy()).abs() > 1e-12 {
            return bad("pooled accuracy differs from trace / total");
        }
        for v in [self.accuracy, self.f1] {
            if !(0.0..=1.0).contains(&v) {
                return bad("accuracy and F1 must lie in [0, 1]");
            }
        }
        if self.regime == Regime::RandomSplit && self.accuracy != self.pooled_accuracy {
            return bad("random-split accuracy must equal trace / total");
        }
        Ok(())
    }
}
