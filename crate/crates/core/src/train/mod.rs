//! Optimisation, restart selection, metrics and the experiment runners.

mod adam;
mod experiment;
mod metrics;
mod report;
mod trainer;

pub use adam::{adam_step, AdamConfig, AdamState};
pub use experiment::{
    plan_loo, plan_random_split, run_experiment, run_loo, run_matrix, run_random_split, ExperimentConfig, LooPlan,
    MatrixOutcome, RandomSplitOutcome, SkippedCell, SplitPlan,
};
pub use metrics::{evaluate, ConfusionMatrix, Evaluation, F1Average};
pub use report::{EvalReport, FoldReport, FoldStatus, Regime};
pub use trainer::{train_once, train_with_restarts, RestartOutcome, RestartRun, TrainConfig, TrainingCurve};
