//! Clickbait headline classification for Indonesian news.
//!
//! The crate is organised along the stages of the pipeline:
//!
//! - [`corpus`]: ingestion, rater-agreement filtering, class balancing,
//!   stratified folds and descriptive word statistics.
//! - [`preprocess`]: text normalisation, stopword removal, WordPiece
//!   tokenization and fixed-length sequence encoding.
//! - [`embed`]: per-token embeddings from a frozen ONNX encoder or a
//!   hash-based stand-in, with an on-disk cache.
//! - [`head`]: masked mean pooling followed by a 100-unit ReLU layer and a
//!   sigmoid output, trained with Adam.
//! - [`baseline`]: TF-IDF features and gradient-boosted trees.
//! - [`eval`]: metrics, ROC/AUC, k-fold cross-validation and holdout scoring.
//!
//! [`pipeline`] glues the stages into trainable classifiers and [`synth`]
//! produces synthetic corpora for model-free experiments.

pub mod baseline;
mod codec;
pub use codec::DecodeError;
pub mod corpus;
pub mod embed;
pub mod eval;
pub mod head;
pub mod pipeline;
pub mod preprocess;
pub mod rng;
pub mod synth;

pub use corpus::{HeadlineRecord, Label, LabeledDataset};
