use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{BaselineError, SparseMatrix, SparseVec};

/// Lowercased terms, split at whitespace and at every non-alphanumeric
/// character.
pub fn terms(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).map(str::to_lowercase)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TfidfModel {
    /// Term → column. Columns follow the lexicographic order of terms.
    pub vocabulary: BTreeMap<String, usize>,
    pub idf: Vec<f64>,
    pub doc_count: usize,
}

/// Fits vocabulary and smoothed idf `ln((1 + N) / (1 + df)) + 1`.
pub fn tfidf_fit<S: AsRef<str>>(corpus: &[S]) -> Result<TfidfModel, BaselineError> {
    if corpus.is_empty() {
        return Err(BaselineError::EmptyCorpus);
    }
    let mut df: BTreeMap<String, usize> = BTreeMap::new();
    for doc in corpus {
        let unique: BTreeSet<String> = terms(doc.as_ref()).collect();
        for t in unique {
            *df.entry(t).or_default() += 1;
        }
    }
    let n = corpus.len() as f64;
    let mut vocabulary = BTreeMap::new();
    let mut idf = Vec::with_capacity(df.len());
    for (col, (term, count)) in df.into_iter().enumerate() {
        idf.push(((1.0 + n) / (1.0 + count as f64)).ln() + 1.0);
        vocabulary.insert(term, col);
    }
    Ok(TfidfModel { vocabulary, idf, doc_count: corpus.len() })
}

impl TfidfModel {
    pub fn n_features(&self) -> usize {
        self.idf.len()
    }

    /// Term count × idf per known term, scaled to unit L2 norm. Unknown terms
    /// are ignored; a document with no known terms maps to the zero vector.
    pub fn transform(&self, text: &str) -> SparseVec {
        let pairs: Vec<(u32, f64)> =
            terms(text).filter_map(|t| self.vocabulary.get(&t).map(|&c| (c as u32, self.idf[c]))).collect();
        let mut v = SparseVec::from_pairs(pairs);
        let norm = v.norm();
        if norm > 0.0 {
            v.scale(1.0 / norm);
        }
        v
    }

    pub fn transform_all<S: AsRef<str>>(&self, docs: &[S]) -> SparseMatrix {
        SparseMatrix::new(self.n_features(), docs.iter().map(|d| self.transform(d.as_ref())).collect())
    }
}
