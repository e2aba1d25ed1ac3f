//! Per-token embeddings for token sequences.
//!
//! Backends implement [`EmbeddingBackend`]. [`embed_batch`] validates a
//! batch, fans it out over worker threads and reassembles results in input
//! order; [`cached_embed`] puts an on-disk cache in front of it.

mod cache;
mod encoder;
mod hash;

use rayon::prelude::*;

use crate::preprocess::TokenSequence;

pub use cache::{cache_key, cached_embed};
pub use encoder::OnnxEncoder;
pub use hash::HashBackend;

#[derive(Debug, thiserror::Error)]
pub enum EmbedError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("failed to load encoder model {path}: {message}")]
    Model { path: String, message: String },
    #[error("encoder signature mismatch: {0}")]
    Signature(String),
    #[error("encoder inference failed: {0}")]
    Inference(String),
    #[error("sequence {index} has length {found}, batch length is {expected}")]
    MixedLengths { index: usize, expected: usize, found: usize },
    #[error("non-finite embedding value for sequence {index}")]
    NonFinite { index: usize },
    #[error("backend returned {found} values for sequence {index}, expected {expected}")]
    Shape { index: usize, expected: usize, found: usize },
    #[error("invalid backend spec {0:?}")]
    BadSpec(String),
}

/// `L × H` per-token vectors, row-major, with the input's attention mask.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSequence {
    pub len: usize,
    pub width: usize,
    pub vectors: Vec<f32>,
    pub mask: Vec<u8>,
}

impl EmbeddingSequence {
    pub fn row(&self, position: usize) -> &[f32] {
        &self.vectors[position * self.width..(position + 1) * self.width]
    }

    pub fn row_mut(&mut self, position: usize) -> &mut [f32] {
        &mut self.vectors[position * self.width..(position + 1) * self.width]
    }

    /// Bit-level equality, treating `-0.0` and `0.0` as different.
    pub fn bitwise_eq(&self, other: &EmbeddingSequence) -> bool {
        self.len == other.len
            && self.width == other.width
            && self.mask == other.mask
            && self.vectors.iter().zip(&other.vectors).all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

/// A source of per-token hidden states.
pub trait EmbeddingBackend: Send + Sync {
    /// Identifies the backend and its weights; part of every cache key.
    fn name(&self) -> &str;

    fn hidden_width(&self) -> usize;

    /// Whether equal inputs always give bitwise-equal outputs.
    fn deterministic(&self) -> bool;

    /// Row-major `L × H` values for each sequence of an equal-length batch.
    fn embed_raw(&self, batch: &[TokenSequence]) -> Result<Vec<Vec<f32>>, EmbedError>;

    /// Sequences handed to one `embed_raw` call by [`embed_batch`].
    fn chunk_size(&self) -> usize {
        32
    }
}

/// Embeds a batch of equal-length sequences. Output order matches input
/// order; masks are copied through.
pub fn embed_batch(
    backend: &dyn EmbeddingBackend,
    sequences: &[TokenSequence],
) -> Result<Vec<EmbeddingSequence>, EmbedError> {
    let Some(first) = sequences.first() else {
        return Ok(Vec::new());
    };
    let len = first.len();
    for (index, s) in sequences.iter().enumerate() {
        if s.len() != len || s.attention_mask.len() != len {
            return Err(EmbedError::MixedLengths { index, expected: len, found: s.len() });
        }
    }
    let width = backend.hidden_width();
    let chunk = backend.chunk_size().max(1);
    let chunks: Vec<Vec<Vec<f32>>> = sequences
        .par_chunks(chunk)
        .map(|c| backend.embed_raw(c))
        .collect::<Result<_, _>>()?;

    let mut out = Vec::with_capacity(sequences.len());
    for (index, (values, seq)) in chunks.into_iter().flatten().zip(sequences).enumerate() {
        if values.len() != len * width {
            return Err(EmbedError::Shape { index, expected: len * width, found: values.len() });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(EmbedError::NonFinite { index });
        }
        out.push(EmbeddingSequence { len, width, vectors: values, mask: seq.attention_mask.clone() });
    }
    if out.len() != sequences.len() {
        return Err(EmbedError::Shape { index: out.len(), expected: sequences.len(), found: out.len() });
    }
    Ok(out)
}

/// Opens a backend from a spec string: `hash:<width>:<seed>` or a path to an
/// ONNX encoder export (optionally written `onnx:<path>`).
pub fn open_backend(spec: &str) -> Result<Box<dyn EmbeddingBackend>, EmbedError> {
    if let Some(rest) = spec.strip_prefix("hash:") {
        let mut parts = rest.split(':');
        let width = parts.next().and_then(|w| w.parse::<usize>().ok());
        let seed = parts.next().and_then(|s| s.parse::<u64>().ok());
        return match (width, seed, parts.next()) {
            (Some(w), Some(s), None) if w >= 1 => Ok(Box::new(HashBackend::new(w, s))),
            _ => Err(EmbedError::BadSpec(spec.to_string())),
        };
    }
    let path = spec.strip_prefix("onnx:").unwrap_or(spec);
    Ok(Box::new(OnnxEncoder::open(path)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn seq(ids: &[u32]) -> TokenSequence {
        TokenSequence {
            ids: ids.to_vec(),
            attention_mask: ids.iter().map(|&i| u8::from(i != 0)).collect(),
            original_length: ids.iter().filter(|&&i| i != 0).count(),
        }
    }

    #[test]
    fn shapes_and_order() {
        let backend = HashBackend::new(8, 1);
        let batch: Vec<_> = (0..70).map(|i| seq(&[2, 10 + i, 3, 0])).collect();
        let out = embed_batch(&backend, &batch).unwrap();
        assert_eq!(out.len(), 70);
        for (s, e) in batch.iter().zip(&out) {
            assert_eq!((e.len, e.width), (4, 8));
            assert_eq!(e.mask, s.attention_mask);
            let expected: Vec<f32> = backend.token_vector(s.ids[1]).iter().map(|&v| v as f32).collect();
            assert_eq!(e.row(1), expected.as_slice());
        }
    }

    #[test]
    fn deterministic_repeat() {
        let backend = HashBackend::new(16, 9);
        let batch: Vec<_> = (0..5).map(|i| seq(&[2, 5 + i, 7, 3])).collect();
        let a = embed_batch(&backend, &batch).unwrap();
        let b = embed_batch(&backend, &batch).unwrap();
        assert!(a.iter().zip(&b).all(|(x, y)| x.bitwise_eq(y)));
    }

    #[test]
    fn empty_and_mixed() {
        let backend = HashBackend::new(4, 0);
        assert!(embed_batch(&backend, &[]).unwrap().is_empty());
        let err = embed_batch(&backend, &[seq(&[2, 3]), seq(&[2, 4, 3])]).unwrap_err();
        assert!(matches!(err, EmbedError::MixedLengths { index: 1, .. }));
    }

    struct NanBackend;
    impl EmbeddingBackend for NanBackend {
        fn name(&self) -> &str {
            "nan"
        }
        fn hidden_width(&self) -> usize {
            1
        }
        fn deterministic(&self) -> bool {
            true
        }
        fn embed_raw(&self, batch: &[TokenSequence]) -> Result<Vec<Vec<f32>>, EmbedError> {
            Ok(batch.iter().map(|s| s.ids.iter().map(|&i| if i == 99 { f32::NAN } else { 0.0 }).collect()).collect())
        }
    }

    #[test]
    fn non_finite_names_index() {
        let err = embed_batch(&NanBackend, &[seq(&[2, 3]), seq(&[2, 99])]).unwrap_err();
        assert!(matches!(err, EmbedError::NonFinite { index: 1 }));
    }

    #[test]
    fn backend_specs() {
        let b = open_backend("hash:64:7").unwrap();
        assert_eq!(b.hidden_width(), 64);
        assert_eq!(b.name(), "hash:64:7");
        assert!(matches!(open_backend("hash:0:7"), Err(EmbedError::BadSpec(_))));
        assert!(matches!(open_backend("hash:x"), Err(EmbedError::BadSpec(_))));
        assert!(open_backend("/nonexistent/model.onnx").is_err());
    }
}
