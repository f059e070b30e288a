use log::{info, warn};
use serde::{Deserialize, Serialize};

use super::{
    evaluate, train_with_restarts, ConfusionMatrix, EvalReport, F1Average, FoldReport, FoldStatus, Regime,
    TrainConfig,
};
use crate::data::{
    augment_windows, carve_validation, leave_one_dog_out, split_random, CellData, ClinicalClass, Corpus, DogId,
    LabeledWindow, LooFold, PlacementSelector, Protocol, Task, TaskSpec,
};
use crate::model::{GaitNetConfig, HeadMode, ModelParams};
use crate::{Error, Result};

/// Offset between the test-split seed and the validation-carve seed.
const VALIDATION_SEED_OFFSET: u64 = 0x5eed_0001;

/// One cell of the experiment matrix plus everything needed to train it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub task: Task,
    pub placement: PlacementSelector,
    pub protocol: Protocol,
    pub head_mode: HeadMode,
    /// Rotation in degrees for training-window augmentation.
    pub augment: Option<f64>,
    pub test_fraction: f64,
    pub dropout_rate: f64,
    pub f1_average: F1Average,
    /// Cells where some task class has fewer windows are skipped.
    pub min_class_windows: usize,
    pub train: TrainConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            task: Task::Multi,
            placement: PlacementSelector::Neck,
            protocol: Protocol::Walk,
            head_mode: HeadMode::Single,
            augment: None,
            test_fraction: 0.2,
            dropout_rate: 0.5,
            f1_average: F1Average::Macro,
            min_class_windows: 10,
            train: TrainConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn task_spec(&self) -> TaskSpec {
        TaskSpec::new(self.task)
    }

    pub fn model_config(&self, window_len: usize) -> GaitNetConfig {
        GaitNetConfig {
            num_classes: self.task_spec().num_classes(),
            window_len,
            dropout_rate: self.dropout_rate,
            head_mode: self.head_mode,
            ..GaitNetConfig::default()
        }
    }

    pub fn cell_name(&self) -> String {
        format!("{}/{}/{}", self.task, self.placement, self.protocol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::config("test fraction must lie in (0, 1)"));
        }
        if !(0.0..1.0).contains(&self.dropout_rate) {
            return Err(Error::config("dropout rate must lie in [0, 1)"));
        }
        if self.augment.is_some_and(|a| !a.is_finite()) {
            return Err(Error::config("augmentation angle must be finite"));
        }
        self.train.validate()
    }

    fn check_cell(&self, cell: &CellData) -> Result<()> {
        let counts = cell.class_counts(self.task_spec().num_classes());
        let names = self.task_spec().class_names();
        if let Some(c) = counts.iter().position(|&n| n < self.min_class_windows.max(1)) {
            return Err(Error::EmptyCell(format!(
                "{}: class {} has {} windows (minimum {})",
                self.cell_name(),
                names[c],
                counts[c],
                self.min_class_windows
            )));
        }
        Ok(())
    }
}

/// Windows feeding one training run and its evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct SplitPlan {
    /// Includes rotated copies when augmentation is on.
    pub train: Vec<LabeledWindow>,
    pub validation: Vec<LabeledWindow>,
    pub test: Vec<LabeledWindow>,
}

fn finish_plan(train: Vec<LabeledWindow>, test: Vec<LabeledWindow>, cfg: &ExperimentConfig) -> Result<SplitPlan> {
    let n = cfg.task_spec().num_classes();
    let seed = cfg.train.seed.wrapping_add(VALIDATION_SEED_OFFSET);
    let (train, validation) = carve_validation(train, n, cfg.train.validation_fraction, seed)?;
    let train = match cfg.augment {
        Some(angle) => augment_windows(&train, angle),
        None => train,
    };
    Ok(SplitPlan { train, validation, test })
}

/// Stratified train / validation / test windows for a random-split run.
pub fn plan_random_split(cell: &CellData, cfg: &ExperimentConfig) -> Result<SplitPlan> {
    cfg.validate()?;
    cfg.check_cell(cell)?;
    let n = cfg.task_spec().num_classes();
    let (train, test) = split_random(cell.windows.clone(), n, cfg.test_fraction, cfg.train.seed)?;
    finish_plan(train, test, cfg)
}

/// Leave-one-dog-out folds of a cell; `skipped` lists dogs without windows.
#[derive(Clone, Debug, PartialEq)]
pub struct LooPlan {
    pub folds: Vec<LooFold>,
    pub skipped: Vec<DogId>,
}

impl LooPlan {
    /// Windows of one fold; the held-out dog never reaches train or validation.
    pub fn split(&self, cell: &CellData, fold: &LooFold, cfg: &ExperimentConfig) -> Result<SplitPlan> {
        let pick = |idx: &[usize]| idx.iter().map(|&i| cell.windows[i].clone()).collect::<Vec<_>>();
        finish_plan(pick(&fold.train), pick(&fold.test), cfg)
    }
}

pub fn plan_loo(cell: &CellData, cfg: &ExperimentConfig) -> Result<LooPlan> {
    cfg.validate()?;
    cfg.check_cell(cell)?;
    if cell.dogs.len() < 2 {
        return Err(Error::config(format!("{}: leave-one-out needs at least two dogs", cfg.cell_name())));
    }
    let folds = leave_one_dog_out(&cell.windows, &cell.dogs);
    let skipped = cell.dogs.iter().filter(|d| !folds.iter().any(|f| &f.dog_id == *d)).cloned().collect();
    Ok(LooPlan { folds, skipped })
}

fn base_report(cfg: &ExperimentConfig, regime: Regime, confusion: ConfusionMatrix) -> EvalReport {
    let accuracy = confusion.accuracy();
    EvalReport {
        task: cfg.task,
        placement: cfg.placement,
        protocol: cfg.protocol,
        regime,
        head_mode: cfg.head_mode,
        augment: cfg.augment,
        seed: cfg.train.seed,
        f1_average: cfg.f1_average,
        accuracy,
        f1: confusion.f1(cfg.f1_average),
        pooled_accuracy: accuracy,
        classes: cfg.task_spec().class_names().into_iter().map(String::from).collect(),
        confusion,
        train_windows: 0,
        validation_windows: 0,
        test_windows: 0,
        selected_seed: None,
        folds: Vec::new(),
    }
}

pub struct RandomSplitOutcome {
    pub report: EvalReport,
    pub params: ModelParams,
}

/// Trains with restarts on a stratified random split and scores the test set.
pub fn run_random_split(corpus: &Corpus, cfg: &ExperimentConfig) -> Result<RandomSplitOutcome> {
    let cell = corpus.cell(&cfg.task_spec(), cfg.placement, cfg.protocol);
    let plan = plan_random_split(&cell, cfg)?;
    info!(
        "{} random split: {} train / {} validation / {} test windows",
        cfg.cell_name(),
        plan.train.len(),
        plan.validation.len(),
        plan.test.len()
    );
    let model = cfg.model_config(corpus.preprocess.window);
    let outcome = train_with_restarts(&plan.train, &plan.validation, &model, &cfg.train)?;
    let eval = evaluate(&outcome.params, &plan.test, cfg.f1_average)?;
    let mut report = base_report(cfg, Regime::RandomSplit, eval.confusion);
    report.train_windows = plan.train.len();
    report.validation_windows = plan.validation.len();
    report.test_windows = plan.test.len();
    report.selected_seed = Some(outcome.seed);
    Ok(RandomSplitOutcome { report, params: outcome.params })
}

fn dog_class(corpus: &Corpus, dog: &DogId) -> ClinicalClass {
    corpus.dog_classes[dog]
}

/// One fold per eligible dog; the aggregate is the unweighted mean over
/// completed folds with confusion matrices summed.
pub fn run_loo(corpus: &Corpus, cfg: &ExperimentConfig) -> Result<EvalReport> {
    let task = cfg.task_spec();
    let cell = corpus.cell(&task, cfg.placement, cfg.protocol);
    let plan = plan_loo(&cell, cfg)?;
    let model = cfg.model_config(corpus.preprocess.window);
    let n = task.num_classes();

    let mut folds = Vec::with_capacity(cell.dogs.len());
    for dog in &cell.dogs {
        let skeleton = |status, reason: String| FoldReport {
            dog_id: dog.clone(),
            class: dog_class(corpus, dog),
            status,
            reason: Some(reason),
            train_windows: 0,
            test_windows: 0,
            selected_seed: None,
            accuracy: None,
            f1: None,
            confusion: None,
        };
        let Some(fold) = plan.folds.iter().find(|f| &f.dog_id == dog) else {
            warn!("{}: dog {dog} has no windows; fold skipped", cfg.cell_name());
            folds.push(skeleton(FoldStatus::Skipped, "no windows in this cell".into()));
            continue;
        };
        let split = match plan.split(&cell, fold, cfg) {
            Ok(s) => s,
            Err(Error::Stratification(reason)) => {
                warn!("{}: fold {dog} skipped: {reason}", cfg.cell_name());
                folds.push(skeleton(FoldStatus::Skipped, reason));
                continue;
            }
            Err(e) => return Err(e),
        };
        info!("{} fold {dog}: {} train / {} test windows", cfg.cell_name(), split.train.len(), split.test.len());
        match train_with_restarts(&split.train, &split.validation, &model, &cfg.train) {
            Ok(outcome) => {
                let eval = evaluate(&outcome.params, &split.test, cfg.f1_average)?;
                folds.push(FoldReport {
                    dog_id: dog.clone(),
                    class: dog_class(corpus, dog),
                    status: FoldStatus::Completed,
                    reason: None,
                    train_windows: split.train.len(),
                    test_windows: split.test.len(),
                    selected_seed: Some(outcome.seed),
                    accuracy: Some(eval.accuracy),
                    f1: Some(eval.f1),
                    confusion: Some(eval.confusion),
                });
            }
            Err(Error::AllRunsDiverged(runs)) => {
                warn!("{}: fold {dog} diverged in all {runs} runs; excluded from the mean", cfg.cell_name());
                let mut f = skeleton(FoldStatus::Diverged, format!("all {runs} runs diverged"));
                f.train_windows = split.train.len();
                folds.push(f);
            }
            Err(e) => return Err(e),
        }
    }

    let done: Vec<&FoldReport> = folds.iter().filter(|f| f.status == FoldStatus::Completed).collect();
    if done.is_empty() {
        return Err(Error::EmptyCell(format!("{}: no leave-one-out fold completed", cfg.cell_name())));
    }
    let mut confusion = ConfusionMatrix::new(n);
    for f in &done {
        confusion.add(f.confusion.as_ref().expect("completed fold has a confusion matrix"))?;
    }
    let mean = |get: fn(&FoldReport) -> Option<f64>| done.iter().filter_map(|f| get(f)).sum::<f64>() / done.len() as f64;
    let mut report = base_report(cfg, Regime::Loo, confusion);
    report.accuracy = mean(|f| f.accuracy);
    report.f1 = mean(|f| f.f1);
    report.train_windows = done.iter().map(|f| f.train_windows).sum();
    report.test_windows = done.iter().map(|f| f.test_windows).sum();
    report.folds = folds;
    Ok(report)
}

pub fn run_experiment(corpus: &Corpus, cfg: &ExperimentConfig, regime: Regime) -> Result<EvalReport> {
    match regime {
        Regime::RandomSplit => run_random_split(corpus, cfg).map(|o| o.report),
        Regime::Loo => run_loo(corpus, cfg),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub task: Task,
    pub placement: PlacementSelector,
    pub protocol: Protocol,
    pub regime: Regime,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct MatrixOutcome {
    pub reports: Vec<EvalReport>,
    pub skipped: Vec<SkippedCell>,
}

/// Runs every requested cell in task, placement, protocol, regime order.
/// Cells without enough data are skipped and listed.
pub fn run_matrix(
    corpus: &Corpus,
    base: &ExperimentConfig,
    tasks: &[Task],
    placements: &[PlacementSelector],
    protocols: &[Protocol],
    regimes: &[Regime],
) -> Result<MatrixOutcome> {
    let mut out = MatrixOutcome::default();
    for &task in tasks {
        for &placement in placements {
            for &protocol in protocols {
                for &regime in regimes {
                    let cfg = ExperimentConfig { task, placement, protocol, ..base.clone() };
                    match run_experiment(corpus, &cfg, regime) {
                        Ok(report) => out.reports.push(report),
                        Err(e @ (Error::EmptyCell(_) | Error::Stratification(_))) => {
                            warn!("{} {regime}: skipped: {e}", cfg.cell_name());
                            out.skipped.push(SkippedCell { task, placement, protocol, regime, reason: e.to_string() });
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }
    }
    Ok(out)
}
