//! Metrics, ROC analysis, cross-validation and holdout evaluation.
//!
//! Clickbait is the positive class in every metric.

mod cv;
mod metrics;
mod report;

pub use cv::{cross_validate, cross_validate_with_split, evaluate_holdout, evaluate_scorer};
pub use metrics::{auc, confusion, prf, roc_curve, ConfusionMatrix, Degeneracy, Metrics};
pub use report::{write_report_csv, write_roc_csv, ExperimentReport, FoldReport, Summary, REPORT_HEADER};

use crate::corpus::CorpusError;
use crate::pipeline::PipelineError;

#[derive(Debug, thiserror::Error)]
pub enum EvalError {
    #[error("{predictions} predictions for {truth} labels")]
    LengthMismatch { predictions: usize, truth: usize },
    #[error("nothing to evaluate")]
    Empty,
    #[error("ROC is undefined when only one class is present")]
    SingleClass,
    #[error("score {0} is NaN")]
    NanScore(usize),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("fold {fold}: {source}")]
    Fold {
        fold: usize,
        #[source]
        source: PipelineError,
    },
    #[error("writing report: {0}")]
    Csv(#[from] csv::Error),
    #[error("writing report: {0}")]
    Io(#[from] std::io::Error),
}
