//! Experiment orchestration: generation over a dataset, band aggregation,
//! metric calibration, annotator agreement and report files.

mod aggregate;
mod calibration;
mod kappa;
mod report;
mod run;

use std::path::PathBuf;

use thiserror::Error;

pub use aggregate::{aggregate_by_band, aggregate_metric, BandAggregate, BandScheme};
pub use calibration::{
    calibration_experiment, default_calibration_pairs, greedy_column, load_calibration_pairs, parse_calibration_pairs,
    CalibrationCategory, CalibrationMetric, CalibrationPair, CalibrationRow, CalibrationTable,
};
pub use kappa::{cohen_kappa, AnnotationSet};
pub use report::{
    emit_report, parse_report, read_report, scot_comparison, write_report, write_scot_comparison,
    ReportFormat, ScotPair,
};
pub use run::{
    read_results, run_experiment, score_pair, write_results, GenerationRecord, RecordFlag, RunContext,
    RunOutcome,
};

use crate::llmgate::GateError;
use crate::metrics::MetricError;
use crate::promptkit::PromptError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("empty dataset")]
    EmptyDataset,
    #[error("no records to aggregate")]
    NoRecords,
    #[error(transparent)]
    Prompt(#[from] PromptError),
    #[error(transparent)]
    Gate(#[from] GateError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    /// Run stopped early; completed records were saved.
    #[error("budget exhausted after {} of {total} entries: spent ${spent_usd:.4} of ${budget_usd:.4}", partial.records.len())]
    BudgetExceeded {
        partial: Box<RunOutcome>,
        total: usize,
        spent_usd: f64,
        budget_usd: f64,
    },
    #[error("calibration category {0} has no pairs")]
    EmptyCategory(CalibrationCategory),
    #[error("invalid calibration pair on line {line}: {reason}")]
    InvalidPair { line: usize, reason: String },
    #[error("annotation sets differ in length: {a} vs {b} (items {items})")]
    AnnotationLengthMismatch { items: usize, a: usize, b: usize },
    #[error("label {label:?} is not in the declared label set")]
    UnknownLabel { label: String },
    #[error("no annotated items")]
    NoAnnotations,
    #[error("malformed {what} at line {line}: {message}")]
    Malformed {
        what: &'static str,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl EvalError {
    pub(crate) fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Self {
        let path = path.into();
        move |source| Self::Io { path, source }
    }
}
