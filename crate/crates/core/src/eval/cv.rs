use rayon::prelude::*;

use super::{EvalError, ExperimentReport, FoldReport};
use crate::corpus::{stratified_kfold, FoldSplit, LabeledDataset, SeedEntry};
use crate::pipeline::{Pipeline, Scorer};

/// Scores `test_set` with a fitted model and reports it as fold `fold`.
pub fn evaluate_scorer(scorer: &dyn Scorer, test_set: &LabeledDataset, fold: usize) -> Result<FoldReport, EvalError> {
    if test_set.is_empty() {
        return Err(EvalError::Empty);
    }
    let titles: Vec<&str> = test_set.titles().collect();
    let scores = scorer.score(&titles).map_err(|source| EvalError::Fold { fold, source })?;
    FoldReport::from_scores(fold, &scores, scorer.threshold(), &test_set.labels())
}

pub fn evaluate_holdout(scorer: &dyn Scorer, holdout: &LabeledDataset) -> Result<FoldReport, EvalError> {
    evaluate_scorer(scorer, holdout, 1)
}

/// Stratified k-fold cross-validation with a fresh fold assignment.
pub fn cross_validate(
    dataset: &LabeledDataset,
    pipeline: &dyn Pipeline,
    k: usize,
    seed: u64,
) -> Result<ExperimentReport, EvalError> {
    let split = stratified_kfold(dataset, k, seed)?;
    let mut report = cross_validate_with_split(dataset, pipeline, &split, true)?;
    report.seeds.push(SeedEntry { operation: "stratified_kfold".into(), seed });
    Ok(report)
}

/// Fits the pipeline on each fold's complement and scores the fold. Folds
/// run concurrently when `parallel` is set; results do not depend on it.
pub fn cross_validate_with_split(
    dataset: &LabeledDataset,
    pipeline: &dyn Pipeline,
    split: &FoldSplit,
    parallel: bool,
) -> Result<ExperimentReport, EvalError> {
    if split.assignments.len() != dataset.len() {
        return Err(EvalError::LengthMismatch { predictions: split.assignments.len(), truth: dataset.len() });
    }
    let titles: Vec<&str> = dataset.titles().collect();
    pipeline.prepare(&titles).map_err(|source| EvalError::Fold { fold: 0, source })?;

    let run = |f: usize| -> Result<FoldReport, EvalError> {
        let fold = f + 1;
        let train = dataset.select(&split.train_indices(f));
        let test = dataset.select(&split.test_indices(f));
        log::info!("{}: fold {fold}/{}: train {} / test {}", pipeline.name(), split.k, train.len(), test.len());
        let scorer = pipeline.fit(&train).map_err(|source| EvalError::Fold { fold, source })?;
        evaluate_scorer(scorer.as_ref(), &test, fold)
    };
    let folds: Vec<FoldReport> = if parallel {
        (0..split.k).into_par_iter().map(run).collect::<Result<_, _>>()?
    } else {
        (0..split.k).map(run).collect::<Result<_, _>>()?
    };
    Ok(ExperimentReport::new(pipeline.name(), folds, dataset.seed_log.clone()))
}
