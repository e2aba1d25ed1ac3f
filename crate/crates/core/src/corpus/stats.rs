use std::collections::BTreeMap;
use std::io::Write;

use super::{Label, LabeledDataset};
use crate::preprocess::StopwordSet;

/// Bag-of-words split used for descriptive statistics and TF-IDF terms.
///
/// The text is split on whitespace; each chunk is stripped of leading and
/// trailing characters that are neither letters nor digits. Chunks made only
/// of punctuation come out as `None`. Inner punctuation (`covid-19`) stays.
pub fn split_words(text: &str, lowercase: bool) -> impl Iterator<Item = Option<String>> + '_ {
    text.split_whitespace().map(move |chunk| {
        let word = chunk.trim_matches(|c: char| !c.is_alphanumeric());
        if word.is_empty() {
            None
        } else if lowercase {
            Some(word.to_lowercase())
        } else {
            Some(word.to_string())
        }
    })
}

/// Word counts for one class together with what was left out.
///
/// `frequencies` total + `stopword_hits` + `punctuation_only` always equals
/// `total_tokens`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WordTally {
    pub frequencies: BTreeMap<String, usize>,
    pub stopword_hits: usize,
    pub punctuation_only: usize,
    pub total_tokens: usize,
}

pub fn tally_words(
    dataset: &LabeledDataset,
    class: Label,
    stopwords: Option<&StopwordSet>,
    lowercase: bool,
) -> WordTally {
    let mut tally = WordTally::default();
    for record in dataset.records().iter().filter(|r| r.final_label == Some(class)) {
        for word in split_words(&record.title, lowercase) {
            tally.total_tokens += 1;
            match word {
                None => tally.punctuation_only += 1,
                Some(w) if stopwords.is_some_and(|s| s.contains(&w)) => tally.stopword_hits += 1,
                Some(w) => *tally.frequencies.entry(w).or_insert(0) += 1,
            }
        }
    }
    tally
}

pub fn word_frequencies(
    dataset: &LabeledDataset,
    class: Label,
    stopwords: Option<&StopwordSet>,
    lowercase: bool,
) -> BTreeMap<String, usize> {
    tally_words(dataset, class, stopwords, lowercase).frequencies
}

/// The `k` most frequent words, by descending count and then ascending word.
pub fn top_k_words(frequencies: &BTreeMap<String, usize>, k: usize) -> Vec<(String, usize)> {
    let mut entries: Vec<(String, usize)> = frequencies.iter().map(|(w, &c)| (w.clone(), c)).collect();
    entries.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    entries.truncate(k);
    entries
}

/// Writes `word,count,class` rows.
pub fn write_frequency_csv<W: Write>(writer: W, rows: &[(String, usize, Label)]) -> csv::Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["word", "count", "class"])?;
    for (word, count, class) in rows {
        out.write_record([word.as_str(), &count.to_string(), class.as_str()])?;
    }
    out.flush()?;
    Ok(())
}
