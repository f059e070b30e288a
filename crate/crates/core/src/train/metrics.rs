use serde::{Deserialize, Serialize};

use crate::data::LabeledWindow;
use crate::model::{predict_batch, ModelParams};
use crate::nn::FeatureMap;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum F1Average {
    /// Unweighted mean over classes that occur in the labels or the predictions.
    #[default]
    Macro,
    /// Pooled counts; equals accuracy for single-label data.
    Micro,
    /// Mean weighted by class support.
    Weighted,
}

impl std::str::FromStr for F1Average {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "macro" => Ok(Self::Macro),
            "micro" => Ok(Self::Micro),
            "weighted" => Ok(Self::Weighted),
            other => Err(Error::Input(format!("unknown F1 average '{other}'"))),
        }
    }
}

/// Rows are ground truth, columns predictions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(num_classes: usize) -> Self {
        Self { counts: vec![vec![0; num_classes]; num_classes] }
    }

    pub fn from_predictions(truth: &[usize], predicted: &[usize], num_classes: usize) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::Input(format!("{} labels but {} predictions", truth.len(), predicted.len())));
        }
        let mut cm = Self::new(num_classes);
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= num_classes || p >= num_classes {
                return Err(Error::Input(format!("class ({t}, {p}) outside {num_classes} classes")));
            }
            cm.counts[t][p] += 1;
        }
        Ok(cm)
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.num_classes()).map(|i| self.counts[i][i]).sum()
    }

    pub fn support(&self, class: usize) -> u64 {
        self.counts[class].iter().sum()
    }

    pub fn predicted(&self, class: usize) -> u64 {
        self.counts.iter().map(|row| row[class]).sum()
    }

    pub fn add(&mut self, other: &ConfusionMatrix) -> Result<()> {
        if other.num_classes() != self.num_classes() {
            return Err(Error::Input("confusion matrices of different sizes".into()));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        Ok(())
    }

    /// Zero for an empty matrix.
    pub fn accuracy(&self) -> f64 {
        ratio(self.trace(), self.total())
    }

    pub fn precision(&self, class: usize) -> f64 {
        ratio(self.counts[class][class], self.predicted(class))
    }

    pub fn recall(&self, class: usize) -> f64 {
        ratio(self.counts[class][class], self.support(class))
    }

    /// Per-class F1; zero when the class is never predicted or never present.
    pub fn class_f1(&self, class: usize) -> f64 {
        let tp = self.counts[class][class];
        ratio(2 * tp, self.support(class) + self.predicted(class))
    }

    pub fn f1(&self, average: F1Average) -> f64 {
        let n = self.num_classes();
        match average {
            F1Average::Micro => self.accuracy(),
            F1Average::Macro => {
                let present: Vec<usize> =
                    (0..n).filter(|&c| self.support(c) > 0 || self.predicted(c) > 0).collect();
                if present.is_empty() {
                    return 0.0;
                }
                present.iter().map(|&c| self.class_f1(c)).sum::<f64>() / present.len() as f64
            }
            F1Average::Weighted => {
                let total = self.total();
                if total == 0 {
                    return 0.0;
                }
                (0..n).map(|c| self.support(c) as f64 * self.class_f1(c)).sum::<f64>() / total as f64
            }
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Window-level metrics of a model on a test set.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub confusion: ConfusionMatrix,
    pub accuracy: f64,
    pub f1: f64,
}

impl Evaluation {
    pub fn from_confusion(confusion: ConfusionMatrix, average: F1Average) -> Self {
        Self { accuracy: confusion.accuracy(), f1: confusion.f1(average), confusion }
    }
}

pub fn evaluate(params: &ModelParams, test: &[LabeledWindow], average: F1Average) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::Input("cannot evaluate on an empty test set".into()));
    }
    let inputs: Vec<&FeatureMap> = test.iter().map(|w| &w.values).collect();
    let predicted = predict_batch(params, &inputs)?;
    let truth: Vec<usize> = test.iter().map(|w| w.label).collect();
    let cm = ConfusionMatrix::from_predictions(&truth, &predicted, params.config.num_classes)?;
    Ok(Evaluation::from_confusion(cm, average))
}
