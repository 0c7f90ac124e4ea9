//! Cross-validation, metrics, the ridge baseline and modality importance.

mod cv;
mod folds;
mod importance;
mod linear;
mod metrics;
mod report;

pub use cv::{cross_validate, cross_validate_with, CvReport, CvSettings, FoldReport};
pub use folds::{kfold, kfold_by_subject, FoldAssignment, SplitMode};
pub use importance::{
    modality_importance, top_indices, ModalityImportance, ModalityShare, DEFAULT_TOP_K,
};
pub use linear::{fit_linear_baseline, fit_standardized_ridge, LinearModel};
pub use metrics::{metrics, pearson, MeanStd, MetricSet};
pub use report::{
    reference_table, write_fig1_csv, write_report_json, write_table1_csv, EvaluationReport,
    ModelImportance, ReferenceRow,
};
