use std::collections::HashMap;
use std::path::Path;

use super::PreprocessError;

pub const PAD: &str = "[PAD]";
pub const UNK: &str = "[UNK]";
pub const CLS: &str = "[CLS]";
pub const SEP: &str = "[SEP]";

/// WordPiece vocabulary. A token's id is its 0-based line number in the
/// vocabulary file.
#[derive(Debug, Clone)]
pub struct Vocab {
    token_to_id: HashMap<String, u32>,
    tokens: Vec<String>,
    pub pad_id: u32,
    pub unk_id: u32,
    pub cls_id: u32,
    pub sep_id: u32,
    pub continuation_prefix: String,
    max_token_chars: usize,
}

pub fn load_vocab(path: impl AsRef<Path>) -> Result<Vocab, PreprocessError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)
        .map_err(|source| PreprocessError::Io { path: path.display().to_string(), source })?;
    Vocab::parse(&text)
}

impl Vocab {
    pub fn parse(text: &str) -> Result<Self, PreprocessError> {
        Self::from_tokens(text.lines().map(|l| l.strip_suffix('\r').unwrap_or(l)))
    }

    pub fn from_tokens<I, S>(tokens: I) -> Result<Self, PreprocessError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut token_to_id = HashMap::new();
        let mut list = Vec::new();
        for (id, token) in tokens.into_iter().enumerate() {
            let token = token.as_ref();
            if token.is_empty() {
                return Err(PreprocessError::EmptyToken(id + 1));
            }
            if let Some(&prev) = token_to_id.get(token) {
                return Err(PreprocessError::DuplicateToken {
                    token: token.to_string(),
                    first_line: prev as usize + 1,
                    second_line: id + 1,
                });
            }
            token_to_id.insert(token.to_string(), id as u32);
            list.push(token.to_string());
        }
        let special = |name: &'static str| token_to_id.get(name).copied().ok_or(PreprocessError::MissingSpecial(name));
        let (pad_id, unk_id, cls_id, sep_id) = (special(PAD)?, special(UNK)?, special(CLS)?, special(SEP)?);
        let max_token_chars = list.iter().map(|t| t.chars().count()).max().unwrap_or(0);
        Ok(Vocab {
            token_to_id,
            tokens: list,
            pad_id,
            unk_id,
            cls_id,
            sep_id,
            continuation_prefix: "##".to_string(),
            max_token_chars,
        })
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.token_to_id.contains_key(token)
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.tokens.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Length in characters of the longest vocabulary entry.
    pub fn max_token_chars(&self) -> usize {
        self.max_token_chars
    }
}
