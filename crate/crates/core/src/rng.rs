//! Seeded randomness.
//!
//! Every random draw in the crate goes through [`ChaCha8Rng`], whose output
//! stream is fixed by its algorithm and therefore identical on every
//! platform. Independent streams (folds, trees, sources, grid cells) get
//! their own seed via [`derive_seed`] / [`derive_seed_str`], so the order in
//! which parallel workers run never changes a result.

use rand::SeedableRng;
use sha2::{Digest, Sha256};

pub use rand_chacha::ChaCha8Rng;

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for the `stream`-th child of `seed`.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    mix64(mix64(seed.wrapping_add(0x9e37_79b9_7f4a_7c15)) ^ mix64(stream.wrapping_mul(0xd1b5_4a32_d192_ed03)))
}

/// Seed for a child stream identified by a string key.
pub fn derive_seed_str(seed: u64, key: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(key.as_bytes());
    let digest = h.finalize();
    let mut bytes = [0u8; 8];
    bytes.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(bytes)
}

/// Hex SHA-256 of arbitrary bytes; used for config and manifest hashes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Uniform sample of `k` distinct indices from `0..n` by partial Fisher–Yates.
///
/// The first `k` positions of the shuffled permutation are returned, in draw
/// order.
pub fn partial_shuffle_indices(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<usize> {
    use rand::Rng;
    let k = k.min(n);
    let mut idx: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        idx.swap(i, j);
    }
    idx.truncate(k);
    idx
}
