//! Headline corpus: ingestion, agreement filtering, balancing, folds and
//! descriptive statistics.

mod agreement;
mod load;
mod sampling;
mod stats;

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use agreement::{fleiss_kappa, filter_full_agreement, rating_matrix, AgreementFilter, KappaError};
pub use load::{load_dataset, parse_dataset, Schema, RATERS_PER_HEADLINE};
pub use sampling::{balance_undersample, stratified_kfold, FoldSplit};
pub use stats::{
    split_words, tally_words, top_k_words, word_frequencies, write_frequency_csv, WordTally,
};

/// Binary class of a headline. Clickbait is the positive class throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    #[serde(rename = "clickbait")]
    Clickbait,
    #[serde(rename = "non-clickbait")]
    NonClickbait,
}

impl Label {
    pub const ALL: [Label; 2] = [Label::Clickbait, Label::NonClickbait];

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Clickbait => "clickbait",
            Label::NonClickbait => "non-clickbait",
        }
    }

    pub fn is_positive(self) -> bool {
        self == Label::Clickbait
    }

    /// 1.0 for clickbait, 0.0 otherwise.
    pub fn target(self) -> f64 {
        if self.is_positive() {
            1.0
        } else {
            0.0
        }
    }

    pub fn other(self) -> Label {
        match self {
            Label::Clickbait => Label::NonClickbait,
            Label::NonClickbait => Label::Clickbait,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_lowercase().as_str() {
            "clickbait" => Ok(Label::Clickbait),
            "non-clickbait" | "non_clickbait" | "nonclickbait" => Ok(Label::NonClickbait),
            _ => Err(CorpusError::UnknownLabel { value: s.to_string(), line: None }),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed row at line {line}: {message}")]
    MalformedRow { line: usize, message: String },
    #[error("unknown label {value:?}{}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    UnknownLabel { value: String, line: Option<usize> },
    #[error("unknown ingestion schema {0:?} (expected \"clickid-json\" or \"simple-csv\")")]
    UnknownSchema(String),
    #[error("duplicate record id {id:?}")]
    DuplicateId { id: String },
    #[error("record {id:?} has no final label")]
    MissingLabel { id: String },
    #[error("operation needs both classes, found only {present}")]
    SingleClass { present: String },
    #[error("fold count must be at least 2, got {0}")]
    TooFewFolds(usize),
    #[error("class {label} has {count} records, fewer than k = {k}")]
    ClassTooSmall { label: Label, count: usize, k: usize },
}

/// One headline with its per-rater labels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadlineRecord {
    pub id: String,
    pub title: String,
    pub rater_labels: Vec<Label>,
    pub final_label: Option<Label>,
}

impl HeadlineRecord {
    /// The shared rater label, if every rater chose the same class.
    pub fn unanimous_label(&self) -> Option<Label> {
        let first = *self.rater_labels.first()?;
        self.rater_labels.iter().all(|&l| l == first).then_some(first)
    }

    /// A record whose single label is already final, as used for
    /// pre-labelled evaluation sets.
    pub fn labeled(id: impl Into<String>, title: impl Into<String>, label: Label) -> Self {
        HeadlineRecord {
            id: id.into(),
            title: title.into(),
            rater_labels: vec![label],
            final_label: Some(label),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub operation: String,
    pub seed: u64,
}

/// Records that all carry a final label, with provenance and the seeds of
/// every random operation that produced them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledDataset {
    records: Vec<HeadlineRecord>,
    pub provenance: String,
    pub seed_log: Vec<SeedEntry>,
}

impl LabeledDataset {
    pub fn new(records: Vec<HeadlineRecord>, provenance: impl Into<String>) -> Result<Self, CorpusError> {
        let mut seen = HashSet::with_capacity(records.len());
        for r in &records {
            if r.final_label.is_none() {
                return Err(CorpusError::MissingLabel { id: r.id.clone() });
            }
            if !seen.insert(r.id.as_str()) {
                return Err(CorpusError::DuplicateId { id: r.id.clone() });
            }
        }
        Ok(LabeledDataset { records, provenance: provenance.into(), seed_log: Vec::new() })
    }

    /// Builds a dataset from already-final records such as a labelled holdout.
    pub fn from_labeled(records: Vec<HeadlineRecord>, provenance: impl Into<String>) -> Result<Self, CorpusError> {
        Self::new(records, provenance)
    }

    pub fn records(&self) -> &[HeadlineRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn label(&self, index: usize) -> Label {
        self.records[index].final_label.expect("validated on construction")
    }

    pub fn labels(&self) -> Vec<Label> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.records.iter().filter(|r| r.final_label == Some(label)).count()
    }

    pub fn titles(&self) -> impl Iterator<Item = &str> {
        self.records.iter().map(|r| r.title.as_str())
    }

    /// Sub-dataset made of the given record indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> LabeledDataset {
        LabeledDataset {
            records: indices.iter().map(|&i| self.records[i].clone()).collect(),
            provenance: self.provenance.clone(),
            seed_log: self.seed_log.clone(),
        }
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> Result<Self, CorpusError> {
        let parsed: LabeledDataset = serde_json::from_str(text).map_err(|e| CorpusError::MalformedRow {
            line: e.line(),
            message: e.to_string(),
        })?;
        let mut ds = LabeledDataset::new(parsed.records, parsed.provenance)?;
        ds.seed_log = parsed.seed_log;
        Ok(ds)
    }

    pub(crate) fn with_records(&self, records: Vec<HeadlineRecord>) -> LabeledDataset {
        LabeledDataset { records, provenance: self.provenance.clone(), seed_log: self.seed_log.clone() }
    }

    pub(crate) fn require_both_classes(&self) -> Result<(), CorpusError> {
        for label in Label::ALL {
            if self.count(label) == 0 {
                return Err(CorpusError::SingleClass { present: label.other().to_string() });
            }
        }
        Ok(())
    }
}
