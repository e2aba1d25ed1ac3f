use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Label, LabeledDataset, SeedEntry};
use crate::rng::seeded;

/// Downsamples the majority class to the size of the minority class.
///
/// The majority indices are shuffled with a seeded Fisher-Yates pass and the
/// first `minority` of them are kept. Surviving records keep their input
/// order, so the output is a subsequence of the input.
pub fn balance_undersample(dataset: &LabeledDataset, seed: u64) -> Result<LabeledDataset, CorpusError> {
    dataset.require_both_classes()?;
    let (clickbait, non) = (dataset.count(Label::Clickbait), dataset.count(Label::NonClickbait));
    let majority = if clickbait >= non { Label::Clickbait } else { Label::NonClickbait };
    let target = clickbait.min(non);

    let mut majority_idx: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.label(i) == majority).collect();
    let mut rng = seeded(seed);
    majority_idx.shuffle(&mut rng);
    let mut keep = vec![true; dataset.len()];
    for &i in &majority_idx[target..] {
        keep[i] = false;
    }

    let records = dataset
        .records()
        .iter()
        .zip(&keep)
        .filter(|(_, &k)| k)
        .map(|(r, _)| r.clone())
        .collect();
    let mut out = dataset.with_records(records);
    out.seed_log.push(SeedEntry { operation: "balance_undersample".into(), seed });
    Ok(out)
}

/// Fold assignment for k-fold cross-validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldSplit {
    pub k: usize,
    pub assignments: Vec<usize>,
}

impl FoldSplit {
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] == fold).collect()
    }

    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len()).filter(|&i| self.assignments[i] != fold).collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Stratified k-fold assignment.
///
/// Each class is shuffled with the seeded generator and dealt round-robin
/// over the folds. The dealing position carries over from one class to the
/// next, so both per-class and total fold sizes differ by at most one.
pub fn stratified_kfold(dataset: &LabeledDataset, k: usize, seed: u64) -> Result<FoldSplit, CorpusError> {
    if k < 2 {
        return Err(CorpusError::TooFewFolds(k));
    }
    for label in Label::ALL {
        let count = dataset.count(label);
        if count < k {
            return Err(CorpusError::ClassTooSmall { label, count, k });
        }
    }
    let mut rng = seeded(seed);
    let mut assignments = vec![0; dataset.len()];
    let mut position = 0usize;
    for label in Label::ALL {
        let mut members: Vec<usize> = (0..dataset.len()).filter(|&i| dataset.label(i) == label).collect();
        members.shuffle(&mut rng);
        for i in members {
            assignments[i] = position % k;
            position += 1;
        }
    }
    Ok(FoldSplit { k, assignments })
}
