use super::{EmbedError, EmbeddingBackend};
use crate::preprocess::TokenSequence;
use crate::rng::{splitmix64, unit_open};

/// Model-free embedding: each token id maps to a fixed pseudo-random unit
/// vector, independent of position and context.
///
/// Components are Gaussian draws (Box-Muller over SplitMix64 hashes of
/// `(seed, id, component)`), normalised to unit length.
#[derive(Debug, Clone)]
pub struct HashBackend {
    width: usize,
    seed: u64,
    name: String,
}

impl HashBackend {
    pub fn new(width: usize, seed: u64) -> Self {
        assert!(width >= 1, "hash backend width must be at least 1");
        HashBackend { width, seed, name: format!("hash:{width}:{seed}") }
    }

    pub fn token_vector(&self, id: u32) -> Vec<f64> {
        let base = splitmix64(self.seed ^ splitmix64(u64::from(id).wrapping_add(0x5EED)));
        let mut v = Vec::with_capacity(self.width + 1);
        let mut counter = 0u64;
        while v.len() < self.width {
            let u1 = unit_open(splitmix64(base.wrapping_add(counter)));
            let u2 = unit_open(splitmix64(base.wrapping_add(counter + 1)));
            counter += 2;
            let r = (-2.0 * u1.ln()).sqrt();
            let theta = std::f64::consts::TAU * u2;
            v.push(r * theta.cos());
            v.push(r * theta.sin());
        }
        v.truncate(self.width);
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for x in &mut v {
            *x /= norm;
        }
        v
    }
}

impl EmbeddingBackend for HashBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn hidden_width(&self) -> usize {
        self.width
    }

    fn deterministic(&self) -> bool {
        true
    }

    fn embed_raw(&self, batch: &[TokenSequence]) -> Result<Vec<Vec<f32>>, EmbedError> {
        Ok(batch
            .iter()
            .map(|s| {
                s.ids
                    .iter()
                    .flat_map(|&id| self.token_vector(id).into_iter().map(|x| x as f32))
                    .collect()
            })
            .collect())
    }
}
