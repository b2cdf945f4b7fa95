//! Execution accuracy: running queries, comparing results, difficulty
//! buckets and reports.

pub mod difficulty;
pub mod execute;
pub mod report;
pub mod run;

pub use difficulty::{classify_difficulty, Classified, Difficulty};
pub use execute::{
    cells_equal, execute, is_ordered, results_equivalent, results_equivalent_with, CompareOptions,
    ExecLimits, ExecutionOutcome, DEFAULT_ROW_CAP, DEFAULT_TIMEOUT,
};
pub use report::{BucketAccuracy, EvalReport, SampleVerdict, TimingSummary, REFERENCE_ACCURACIES};
pub use run::{evaluate_set, evaluate_set_with, EvalConfig, PolicySpec};
