use super::vocab::UNK;
use super::Vocab;

/// Words longer than this many characters map straight to `[UNK]`.
pub const MAX_WORD_CHARS: usize = 100;

/// Greedy longest-match-first WordPiece segmentation of each
/// whitespace-delimited word.
///
/// Non-initial pieces are looked up with the continuation prefix. A word that
/// cannot be fully segmented becomes a single `[UNK]`.
pub fn wordpiece_tokenize(text: &str, vocab: &Vocab) -> Vec<String> {
    let mut out = Vec::new();
    for word in text.split_whitespace() {
        match segment_word(word, vocab) {
            Some(pieces) => out.extend(pieces),
            None => out.push(UNK.to_string()),
        }
    }
    out
}

fn segment_word(word: &str, vocab: &Vocab) -> Option<Vec<String>> {
    // Byte offsets of every char boundary, including the end.
    let bounds: Vec<usize> = word.char_indices().map(|(i, _)| i).chain([word.len()]).collect();
    let chars = bounds.len() - 1;
    if chars > MAX_WORD_CHARS {
        return None;
    }
    let prefix = vocab.continuation_prefix.as_str();
    let prefix_chars = prefix.chars().count();
    let mut pieces = Vec::new();
    let mut start = 0;
    let mut candidate = String::with_capacity(word.len() + prefix.len());
    while start < chars {
        let budget = if start == 0 {
            vocab.max_token_chars()
        } else {
            vocab.max_token_chars().saturating_sub(prefix_chars)
        };
        let mut end = chars.min(start + budget);
        let mut found = None;
        while end > start {
            candidate.clear();
            if start > 0 {
                candidate.push_str(prefix);
            }
            candidate.push_str(&word[bounds[start]..bounds[end]]);
            // Continuation entries may not open a word.
            let initial_continuation = start == 0 && !prefix.is_empty() && candidate.starts_with(prefix);
            if !initial_continuation && vocab.contains(&candidate) {
                found = Some(candidate.clone());
                break;
            }
            end -= 1;
        }
        pieces.push(found?);
        start = end;
    }
    Some(pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy() -> Vocab {
        Vocab::parse("[PAD]\n[UNK]\n[CLS]\n[SEP]\nini\nbikin\nheboh\n##nya\n").unwrap()
    }

    #[test]
    fn whole_words() {
        assert_eq!(wordpiece_tokenize("bikin heboh", &toy()), vec!["bikin", "heboh"]);
    }

    #[test]
    fn continuation_piece() {
        assert_eq!(wordpiece_tokenize("ininya", &toy()), vec!["ini", "##nya"]);
    }

    #[test]
    fn unknown_word() {
        assert_eq!(wordpiece_tokenize("zzz", &toy()), vec!["[UNK]"]);
        // Segmentable prefix but unsegmentable tail still yields one [UNK].
        assert_eq!(wordpiece_tokenize("inizz heboh", &toy()), vec!["[UNK]", "heboh"]);
    }

    #[test]
    fn continuation_never_word_initial() {
        assert_eq!(wordpiece_tokenize("##nya", &toy()), vec!["[UNK]"]);
    }

    #[test]
    fn multibyte_words() {
        let v = Vocab::parse("[PAD]\n[UNK]\n[CLS]\n[SEP]\ncafé\n##é\ncaf\n").unwrap();
        assert_eq!(wordpiece_tokenize("café caféé", &v), vec!["café", "café", "##é"]);
    }

    #[test]
    fn overlong_word_is_unknown() {
        let long = "a".repeat(MAX_WORD_CHARS + 1);
        let v = Vocab::parse("[PAD]\n[UNK]\n[CLS]\n[SEP]\na\n##a\n").unwrap();
        assert_eq!(wordpiece_tokenize(&long, &v), vec!["[UNK]"]);
    }

    proptest! {
        #[test]
        fn non_unk_pieces_rebuild_word(word in "[abcde]{1,12}", extra in proptest::collection::vec("[abcde]{1,3}", 0..12)) {
            let mut tokens = vec!["[PAD]".to_string(), "[UNK]".into(), "[CLS]".into(), "[SEP]".into(), "a".into(), "##a".into()];
            for (i, e) in extra.iter().enumerate() {
                let t = if i % 2 == 0 { e.clone() } else { format!("##{e}") };
                if !tokens.contains(&t) { tokens.push(t); }
            }
            let v = Vocab::from_tokens(&tokens).unwrap();
            let pieces = wordpiece_tokenize(&word, &v);
            if pieces != vec!["[UNK]".to_string()] {
                let rebuilt: String = pieces.iter().map(|p| p.trim_start_matches("##")).collect();
                prop_assert_eq!(rebuilt, word);
                prop_assert!(!pieces[0].starts_with("##"));
            }
        }
    }
}
