//! AUC, LR feature importance, feature-group ablations, sensitivity sweeps
//! and per-field evaluation.

mod auc;
mod experiment;
mod importance;

pub use auc::auc;
pub use experiment::{
    ablation_csv, ablation_run, feature_groups, per_field_csv, per_field_eval, predictions_csv, repeat_runs,
    run_experiment, sensitivity_csv, sensitivity_run, AblationCell, EvalReport, Experiment, ExperimentConfig,
    FeatureGroup, FieldOutcome, Prediction, RepeatSummary, SensitivityPoint, SweepAxis, SweepBase,
};
pub use importance::{feature_importance, FeatureImportance, ImportanceAggregate, ImportanceReport};
