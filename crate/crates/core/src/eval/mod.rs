//! Cross-validation, metrics, the experiment grid and the account-level
//! analyses.

pub mod experiment;
pub mod folds;
pub mod grid;
pub mod importance;
pub mod metrics;
pub mod usersplit;

pub use experiment::{
    cell_seed, cross_validate, fit_fold, fit_layout, fit_on, make_folds, run_experiment, CvOptions, ExperimentResult, FoldFit,
    FoldOutcome, PreparedCorpus,
};
pub use folds::{grouped_folds, stratified_folds, stratified_subsample, FoldPlan, GroupBy};
pub use grid::{run_grid, run_grid_with, GridReport, GridRow};
pub use importance::{importance_report, ImportanceEntry, ImportanceReport};
pub use metrics::{chance_f1, confusion, mean_metrics, prf, prior_f1, ConfusionMatrix, Metrics};
pub use usersplit::{user_median_split, AccountScore, GroupAverages, UserSplitReport};
