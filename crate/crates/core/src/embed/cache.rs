//! On-disk embedding cache.
//!
//! One file per (backend, sequence) under the cache directory, named by the
//! hex SHA-256 of the backend name, sequence length, ids and mask. Layout,
//! all little-endian:
//!
//! ```text
//! u32 L | u32 H | u32 name_len | name bytes | L*H f32, row-major
//! ```
//!
//! Entries are written to a temporary file and renamed into place, so
//! readers never observe a partial entry.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use sha2::{Digest, Sha256};

use super::{embed_batch, EmbedError, EmbeddingBackend, EmbeddingSequence};
use crate::preprocess::TokenSequence;

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

pub fn cache_key(backend_name: &str, sequence: &TokenSequence) -> String {
    let mut h = Sha256::new();
    h.update((backend_name.len() as u32).to_le_bytes());
    h.update(backend_name.as_bytes());
    h.update((sequence.len() as u32).to_le_bytes());
    for id in &sequence.ids {
        h.update(id.to_le_bytes());
    }
    h.update(&sequence.attention_mask);
    hex::encode(h.finalize())
}

/// Same result as [`embed_batch`], reading hits from `cache_dir` and storing
/// misses there. Unreadable or inconsistent entries are recomputed.
pub fn cached_embed(
    backend: &dyn EmbeddingBackend,
    cache_dir: &Path,
    sequences: &[TokenSequence],
) -> Result<Vec<EmbeddingSequence>, EmbedError> {
    let name = backend.name();
    let width = backend.hidden_width();
    let mut out: Vec<Option<EmbeddingSequence>> = Vec::with_capacity(sequences.len());
    let mut misses = Vec::new();
    for (i, seq) in sequences.iter().enumerate() {
        let path = cache_dir.join(cache_key(name, seq));
        match read_entry(&path, name, seq.len(), width) {
            Ok(Some(vectors)) => out.push(Some(EmbeddingSequence {
                len: seq.len(),
                width,
                vectors,
                mask: seq.attention_mask.clone(),
            })),
            Ok(None) => {
                out.push(None);
                misses.push(i);
            }
            Err(reason) => {
                log::warn!("discarding corrupt cache entry {}: {reason}", path.display());
                let _ = fs::remove_file(&path);
                out.push(None);
                misses.push(i);
            }
        }
    }

    if !misses.is_empty() {
        let todo: Vec<TokenSequence> = misses.iter().map(|&i| sequences[i].clone()).collect();
        let computed = embed_batch(backend, &todo)?;
        for (&i, emb) in misses.iter().zip(computed) {
            let path = cache_dir.join(cache_key(name, &sequences[i]));
            write_entry(&path, name, &emb)?;
            out[i] = Some(emb);
        }
    }
    Ok(out.into_iter().map(|e| e.expect("every slot filled")).collect())
}

/// `Ok(None)` when absent, `Err` when present but unusable.
fn read_entry(path: &Path, name: &str, len: usize, width: usize) -> Result<Option<Vec<f32>>, String> {
    let bytes = match fs::read(path) {
        Ok(b) => b,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.to_string()),
    };
    let word = |at: usize| -> Result<usize, String> {
        bytes
            .get(at..at + 4)
            .map(|b| u32::from_le_bytes(b.try_into().unwrap()) as usize)
            .ok_or_else(|| "truncated header".to_string())
    };
    let (l, h, name_len) = (word(0)?, word(4)?, word(8)?);
    if l != len || h != width {
        return Err(format!("shape {l}x{h}, expected {len}x{width}"));
    }
    let name_end = 12 + name_len;
    if bytes.get(12..name_end) != Some(name.as_bytes()) {
        return Err("backend name mismatch".into());
    }
    let body = &bytes[name_end..];
    if body.len() != l * h * 4 {
        return Err(format!("body has {} bytes, expected {}", body.len(), l * h * 4));
    }
    let values: Vec<f32> = body.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap())).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err("non-finite value".into());
    }
    Ok(Some(values))
}

fn write_entry(path: &Path, name: &str, emb: &EmbeddingSequence) -> Result<(), EmbedError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let io = |p: &Path| {
        let p = p.display().to_string();
        move |source| EmbedError::Io { path: p, source }
    };
    fs::create_dir_all(dir).map_err(io(dir))?;
    let mut bytes = Vec::with_capacity(12 + name.len() + emb.vectors.len() * 4);
    bytes.extend_from_slice(&(emb.len as u32).to_le_bytes());
    bytes.extend_from_slice(&(emb.width as u32).to_le_bytes());
    bytes.extend_from_slice(&(name.len() as u32).to_le_bytes());
    bytes.extend_from_slice(name.as_bytes());
    for v in &emb.vectors {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let tmp: PathBuf = dir.join(format!(
        ".{}.{}.{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("entry"),
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    fs::write(&tmp, &bytes).map_err(io(&tmp))?;
    fs::rename(&tmp, path).map_err(io(path))
}
