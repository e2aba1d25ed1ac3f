use serde::{Deserialize, Serialize};

use super::{
    normalize_text, remove_stopwords, split_punctuation, wordpiece_tokenize, PreprocessError, StopwordSet, Vocab,
};

pub const DEFAULT_MAX_LEN: usize = 64;

/// Fixed-length token ids with their attention mask.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
    pub attention_mask: Vec<u8>,
    /// Number of non-pad positions.
    pub original_length: usize,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }
}

/// Frames `tokens` as `[CLS] tokens [SEP]`, truncating the tokens to
/// `max_len - 2` and padding to `max_len`. Tokens missing from the
/// vocabulary map to `[UNK]`.
pub fn encode_sequence<S: AsRef<str>>(
    tokens: &[S],
    vocab: &Vocab,
    max_len: usize,
) -> Result<TokenSequence, PreprocessError> {
    if max_len < 3 {
        return Err(PreprocessError::MaxLenTooSmall(max_len));
    }
    let kept = tokens.len().min(max_len - 2);
    let mut ids = Vec::with_capacity(max_len);
    ids.push(vocab.cls_id);
    ids.extend(tokens[..kept].iter().map(|t| vocab.id(t.as_ref()).unwrap_or(vocab.unk_id)));
    ids.push(vocab.sep_id);
    let original_length = ids.len();
    ids.resize(max_len, vocab.pad_id);
    let mut attention_mask = vec![1u8; original_length];
    attention_mask.resize(max_len, 0);
    Ok(TokenSequence { ids, attention_mask, original_length })
}

/// Raw headline → [`TokenSequence`] with a fixed configuration.
#[derive(Debug, Clone)]
pub struct HeadlineEncoder {
    pub vocab: Vocab,
    pub stopwords: Option<StopwordSet>,
    pub max_len: usize,
}

impl HeadlineEncoder {
    pub fn new(vocab: Vocab, stopwords: Option<StopwordSet>, max_len: usize) -> Result<Self, PreprocessError> {
        if max_len < 3 {
            return Err(PreprocessError::MaxLenTooSmall(max_len));
        }
        Ok(HeadlineEncoder { vocab, stopwords, max_len })
    }

    pub fn tokens(&self, raw: &str) -> Vec<String> {
        let mut text = normalize_text(raw);
        if let Some(stop) = &self.stopwords {
            text = remove_stopwords(&text, stop);
        }
        wordpiece_tokenize(&split_punctuation(&text), &self.vocab)
    }

    pub fn encode(&self, raw: &str) -> TokenSequence {
        encode_sequence(&self.tokens(raw), &self.vocab, self.max_len).expect("max_len validated on construction")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> Vocab {
        Vocab::parse("[PAD]\n[UNK]\n[CLS]\n[SEP]\nini\nbikin\nheboh\n##nya\n").unwrap()
    }

    #[test]
    fn frames_and_pads() {
        let s = encode_sequence(&["ini", "heboh"], &toy(), 6).unwrap();
        assert_eq!(s.ids, vec![2, 4, 6, 3, 0, 0]);
        assert_eq!(s.attention_mask, vec![1, 1, 1, 1, 0, 0]);
        assert_eq!(s.original_length, 4);
    }

    #[test]
    fn empty_tokens() {
        let s = encode_sequence::<&str>(&[], &toy(), 4).unwrap();
        assert_eq!(s.ids, vec![2, 3, 0, 0]);
        assert_eq!(s.attention_mask, vec![1, 1, 0, 0]);
    }

    #[test]
    fn truncates() {
        let tokens = vec!["ini"; 10];
        let s = encode_sequence(&tokens, &toy(), 6).unwrap();
        assert_eq!(s.ids, vec![2, 4, 4, 4, 4, 3]);
        assert_eq!(s.ids[5], toy().sep_id);
        assert_eq!(s.original_length, 6);
    }

    #[test]
    fn max_len_too_small() {
        assert!(matches!(encode_sequence(&["ini"], &toy(), 2), Err(PreprocessError::MaxLenTooSmall(2))));
    }

    #[test]
    fn unknown_token_maps_to_unk() {
        let s = encode_sequence(&["zzz"], &toy(), 4).unwrap();
        assert_eq!(s.ids, vec![2, 1, 3, 0]);
    }

    #[test]
    fn headline_encoder_full_path() {
        let enc = HeadlineEncoder::new(toy(), Some(StopwordSet::from_words(["yang"])), 8).unwrap();
        assert_eq!(enc.tokens("  Ininya yang bikin   heboh! "), vec!["[UNK]", "bikin", "heboh", "[UNK]"]);
        let enc = HeadlineEncoder::new(toy(), None, 8).unwrap();
        assert_eq!(enc.tokens("ininya heboh"), vec!["ini", "##nya", "heboh"]);
    }

    proptest! {
        #[test]
        fn fixed_length_and_mask(n in 0usize..40, max_len in 3usize..20) {
            let tokens = vec!["heboh"; n];
            let s = encode_sequence(&tokens, &toy(), max_len).unwrap();
            prop_assert_eq!(s.ids.len(), max_len);
            prop_assert_eq!(s.attention_mask.iter().filter(|&&m| m == 1).count(), s.original_length);
            prop_assert_eq!(s.ids[0], 2);
            prop_assert_eq!(s.ids[s.original_length - 1], 3);
            for (id, m) in s.ids.iter().zip(&s.attention_mask) {
                prop_assert_eq!(*m == 1, *id != 0);
            }
        }

        #[test]
        fn stopword_removal_idempotent(words in proptest::collection::vec("(yang|di|Di|apa|sini|ini,)", 0..10)) {
            let stop = StopwordSet::from_words(["yang", "di"]);
            let text = words.join(" ");
            let once = remove_stopwords(&text, &stop);
            prop_assert_eq!(remove_stopwords(&once, &stop), once);
        }
    }
}
