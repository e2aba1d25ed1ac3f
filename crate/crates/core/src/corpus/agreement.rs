use super::{CorpusError, HeadlineRecord, Label, LabeledDataset};

/// Result of [`filter_full_agreement`].
#[derive(Debug, Clone)]
pub struct AgreementFilter {
    pub dataset: LabeledDataset,
    /// Records dropped because their raters disagreed (or had no labels).
    pub dropped: usize,
}

/// Keeps the records whose raters all chose the same class and sets their
/// final label to that class. Input order is preserved.
pub fn filter_full_agreement(records: &[HeadlineRecord]) -> Result<AgreementFilter, CorpusError> {
    let mut kept = Vec::with_capacity(records.len());
    let mut dropped = 0;
    for r in records {
        match r.unanimous_label() {
            Some(label) => kept.push(HeadlineRecord { final_label: Some(label), ..r.clone() }),
            None => dropped += 1,
        }
    }
    let dataset = LabeledDataset::new(kept, "full rater agreement")?;
    Ok(AgreementFilter { dataset, dropped })
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KappaError {
    #[error("ratings matrix is empty")]
    Empty,
    #[error("item {item} has {found} categories, expected {expected}")]
    RaggedCategories { item: usize, expected: usize, found: usize },
    #[error("item {item} has {found} ratings, expected {expected}")]
    UnequalRaters { item: usize, expected: u64, found: u64 },
    #[error("each item needs at least 2 ratings, got {0}")]
    TooFewRaters(u64),
    #[error("kappa undefined: chance agreement is 1 but observed agreement is {observed}")]
    Undefined { observed: f64 },
}

/// Per-item category counts (`[clickbait, non-clickbait]`) from the rater
/// labels of each record.
pub fn rating_matrix(records: &[HeadlineRecord]) -> Vec<Vec<u32>> {
    records
        .iter()
        .map(|r| {
            Label::ALL
                .iter()
                .map(|&l| r.rater_labels.iter().filter(|&&x| x == l).count() as u32)
                .collect()
        })
        .collect()
}

/// Fleiss' kappa over a matrix of per-item, per-category rater counts.
///
/// Every item must carry the same number of ratings `n >= 2`. A matrix where
/// every item is unanimous yields exactly 1.0, including the degenerate case
/// where only one category is ever used.
pub fn fleiss_kappa(ratings: &[Vec<u32>]) -> Result<f64, KappaError> {
    let first = ratings.first().ok_or(KappaError::Empty)?;
    let categories = first.len();
    let n: u64 = first.iter().map(|&c| c as u64).sum();
    if n < 2 {
        return Err(KappaError::TooFewRaters(n));
    }
    let mut column_totals = vec![0u64; categories];
    let mut agreement_sum = 0.0;
    let mut all_unanimous = true;
    for (item, row) in ratings.iter().enumerate() {
        if row.len() != categories {
            return Err(KappaError::RaggedCategories { item, expected: categories, found: row.len() });
        }
        let total: u64 = row.iter().map(|&c| c as u64).sum();
        if total != n {
            return Err(KappaError::UnequalRaters { item, expected: n, found: total });
        }
        let squares: u64 = row.iter().map(|&c| (c as u64) * (c as u64)).sum();
        all_unanimous &= squares == n * n;
        agreement_sum += (squares - n) as f64 / (n * (n - 1)) as f64;
        for (t, &c) in column_totals.iter_mut().zip(row) {
            *t += c as u64;
        }
    }
    if all_unanimous {
        return Ok(1.0);
    }

    let items = ratings.len() as f64;
    let observed = agreement_sum / items;
    let grand = items * n as f64;
    let chance: f64 = column_totals.iter().map(|&t| (t as f64 / grand).powi(2)).sum();
    if chance >= 1.0 {
        return Err(KappaError::Undefined { observed });
    }
    Ok((observed - chance) / (1.0 - chance))
}
