//! TF-IDF document vectors and gradient-boosted regression trees on top of
//! them.

mod gbt;
mod io;
mod sparse;
mod tfidf;

pub use gbt::{find_best_split, gbt_predict, gbt_train, gbt_train_logged, logistic_loss, GbtConfig, GbtModel, Split, Tree, TreeNode};
pub use io::{gbt_from_bytes, gbt_to_bytes, load_gbt, load_tfidf, save_gbt, save_tfidf, tfidf_from_bytes, tfidf_to_bytes};
pub use sparse::{SparseMatrix, SparseVec};
pub use tfidf::{terms, tfidf_fit, TfidfModel};

use crate::corpus::Label;

#[derive(Debug, thiserror::Error)]
pub enum BaselineError {
    #[error("cannot fit TF-IDF on an empty corpus")]
    EmptyCorpus,
    #[error("boosting needs both classes, found only {0}")]
    SingleClass(Label),
    #[error("{rows} feature rows but {labels} labels")]
    LengthMismatch { rows: usize, labels: usize },
    #[error("invalid boosting config: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model file: {0}")]
    Decode(#[from] crate::codec::DecodeError),
}
