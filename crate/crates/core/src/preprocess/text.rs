use unicode_normalization::UnicodeNormalization;

use super::StopwordSet;

/// NFC-normalises, collapses whitespace runs to one space and trims. Case is
/// preserved.
pub fn normalize_text(raw: &str) -> String {
    let composed: String = raw.nfc().collect();
    composed.split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Drops whitespace-delimited words that are stopwords (case-insensitive).
/// A word with punctuation attached (`di,`) is not a stopword match.
pub fn remove_stopwords(text: &str, stopwords: &StopwordSet) -> String {
    text.split_whitespace()
        .filter(|w| !stopwords.contains(w))
        .collect::<Vec<_>>()
        .join(" ")
}

fn is_punctuation(c: char) -> bool {
    c.is_ascii_punctuation()
        || ('\u{2000}'..='\u{206F}').contains(&c)
        || ('\u{3000}'..='\u{303F}').contains(&c)
        || matches!(c, '¡' | '¿' | '«' | '»' | '·')
}

/// Surrounds punctuation characters with spaces so each becomes its own
/// word, as BERT's basic tokenizer does before WordPiece.
pub fn split_punctuation(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 8);
    for c in text.chars() {
        if is_punctuation(c) {
            out.push(' ');
            out.push(c);
            out.push(' ');
        } else {
            out.push(c);
        }
    }
    out.split_whitespace().collect::<Vec<_>>().join(" ")
}
