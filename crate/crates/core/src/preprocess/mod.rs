//! Text to encoder-ready token sequences.
//!
//! The headline path is: [`normalize_text`] → [`remove_stopwords`] →
//! [`split_punctuation`] → [`wordpiece_tokenize`] → [`encode_sequence`].
//! [`HeadlineEncoder`] runs all of it with one configuration.

mod encode;
mod stopwords;
mod text;
mod vocab;
mod wordpiece;

pub use encode::{encode_sequence, HeadlineEncoder, TokenSequence, DEFAULT_MAX_LEN};
pub use stopwords::{StopwordSet, BUNDLED_STOPWORDS};
pub use text::{normalize_text, remove_stopwords, split_punctuation};
pub use vocab::{load_vocab, Vocab, CLS, PAD, SEP, UNK};
pub use wordpiece::{wordpiece_tokenize, MAX_WORD_CHARS};

#[derive(Debug, thiserror::Error)]
pub enum PreprocessError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("duplicate vocab token {token:?} on lines {first_line} and {second_line}")]
    DuplicateToken { token: String, first_line: usize, second_line: usize },
    #[error("vocab is missing special token {0}")]
    MissingSpecial(&'static str),
    #[error("empty vocab token on line {0}")]
    EmptyToken(usize),
    #[error("max_len must be at least 3, got {0}")]
    MaxLenTooSmall(usize),
}
