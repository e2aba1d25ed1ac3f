//! Seeded randomness.
//!
//! Every random operation in the crate draws from [`ChaCha8Rng`] seeded with
//! [`SeedableRng::seed_from_u64`]. ChaCha8 output is specified independently
//! of platform and word size, so a seed reproduces the same stream anywhere.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name recorded alongside seeds in dataset and run artifacts.
pub const GENERATOR_NAME: &str = "chacha8 (seed_from_u64)";

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser. Used as a stateless hash for deterministic
/// per-token vectors.
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Maps a 64-bit hash to a uniform real in the open interval (0, 1).
pub fn unit_open(bits: u64) -> f64 {
    ((bits >> 12) as f64 + 0.5) / (1u64 << 52) as f64
}
