use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{auc, confusion, prf, roc_curve, ConfusionMatrix, EvalError, Metrics};
use crate::corpus::{Label, SeedEntry};

/// Evaluation of one held-out set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    /// 1-based fold number.
    pub fold: usize,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
    pub roc_points: Vec<(f64, f64)>,
    pub auc: f64,
}

impl FoldReport {
    pub fn from_scores(fold: usize, scores: &[f64], threshold: f64, truth: &[Label]) -> Result<Self, EvalError> {
        let preds: Vec<Label> =
            scores.iter().map(|&s| if s >= threshold { Label::Clickbait } else { Label::NonClickbait }).collect();
        let confusion = confusion(&preds, truth)?;
        let roc_points = roc_curve(scores, truth)?;
        Ok(FoldReport { fold, confusion, metrics: prf(&confusion), auc: auc(&roc_points), roc_points })
    }
}

/// Per-metric aggregate across folds.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub auc: f64,
    pub macro_precision: f64,
    pub macro_recall: f64,
    pub macro_f1: f64,
    pub tp: f64,
    pub fp: f64,
    #[serde(rename = "fn")]
    pub fn_: f64,
    pub tn: f64,
}

impl Summary {
    fn of(f: &FoldReport) -> Self {
        let m = &f.metrics;
        let c = &f.confusion;
        Summary {
            accuracy: m.accuracy,
            precision: m.precision,
            recall: m.recall,
            f1: m.f1,
            auc: f.auc,
            macro_precision: m.macro_precision,
            macro_recall: m.macro_recall,
            macro_f1: m.macro_f1,
            tp: c.tp as f64,
            fp: c.fp as f64,
            fn_: c.fn_ as f64,
            tn: c.tn as f64,
        }
    }

    fn fields_mut(&mut self) -> [&mut f64; 12] {
        [
            &mut self.accuracy,
            &mut self.precision,
            &mut self.recall,
            &mut self.f1,
            &mut self.auc,
            &mut self.macro_precision,
            &mut self.macro_recall,
            &mut self.macro_f1,
            &mut self.tp,
            &mut self.fp,
            &mut self.fn_,
            &mut self.tn,
        ]
    }

    fn fields(mut self) -> [f64; 12] {
        self.fields_mut().map(|x| *x)
    }

    fn from_fields(values: [f64; 12]) -> Self {
        let mut s = Summary::default();
        for (slot, v) in s.fields_mut().into_iter().zip(values) {
            *slot = v;
        }
        s
    }
}

/// Cross-validation outcome: fold reports plus their mean and population
/// standard deviation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub pipeline: String,
    pub folds: Vec<FoldReport>,
    pub mean: Summary,
    pub std: Summary,
    pub config: serde_json::Value,
    pub seeds: Vec<SeedEntry>,
}

impl ExperimentReport {
    pub fn new(pipeline: impl Into<String>, folds: Vec<FoldReport>, seeds: Vec<SeedEntry>) -> Self {
        let (mean, std) = aggregate(&folds);
        ExperimentReport { pipeline: pipeline.into(), folds, mean, std, config: serde_json::Value::Null, seeds }
    }
}

fn aggregate(folds: &[FoldReport]) -> (Summary, Summary) {
    if folds.is_empty() {
        return (Summary::default(), Summary::default());
    }
    let n = folds.len() as f64;
    let rows: Vec<[f64; 12]> = folds.iter().map(|f| Summary::of(f).fields()).collect();
    let mut mean = [0.0; 12];
    let mut std = [0.0; 12];
    for j in 0..12 {
        mean[j] = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        std[j] = (rows.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n).sqrt();
    }
    (Summary::from_fields(mean), Summary::from_fields(std))
}

pub const REPORT_HEADER: [&str; 10] = ["fold", "accuracy", "precision", "recall", "f1", "auc", "tp", "fp", "fn", "tn"];

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

/// One row per fold followed by `mean` and `std` rows. Reals use six
/// decimals so repeated runs produce identical bytes.
pub fn write_report_csv<W: Write>(report: &ExperimentReport, writer: W) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(REPORT_HEADER)?;
    for f in &report.folds {
        let m = &f.metrics;
        let c = &f.confusion;
        w.write_record([
            f.fold.to_string(),
            f6(m.accuracy),
            f6(m.precision),
            f6(m.recall),
            f6(m.f1),
            f6(f.auc),
            c.tp.to_string(),
            c.fp.to_string(),
            c.fn_.to_string(),
            c.tn.to_string(),
        ])?;
    }
    for (name, s) in [("mean", &report.mean), ("std", &report.std)] {
        w.write_record([
            name.to_string(),
            f6(s.accuracy),
            f6(s.precision),
            f6(s.recall),
            f6(s.f1),
            f6(s.auc),
            f6(s.tp),
            f6(s.fp),
            f6(s.fn_),
            f6(s.tn),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// ROC points of every fold as `fold,fpr,tpr`.
pub fn write_roc_csv<W: Write>(folds: &[FoldReport], writer: W) -> Result<(), EvalError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["fold", "fpr", "tpr"])?;
    for f in folds {
        for &(x, y) in &f.roc_points {
            w.write_record([f.fold.to_string(), f6(x), f6(y)])?;
        }
    }
    w.flush()?;
    Ok(())
}
