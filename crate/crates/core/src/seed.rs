//! Stable derivation of independent RNG streams from a master seed.
//!
//! Streams are keyed by labels so that output does not depend on the order
//! in which work is scheduled.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Derives a child seed from `master` and a label path.
pub fn derive(master: u64, labels: &[&str]) -> u64 {
    let mut h = Sha256::new();
    h.update(master.to_le_bytes());
    for label in labels {
        h.update((label.len() as u64).to_le_bytes());
        h.update(label.as_bytes());
    }
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("sha256 output is 32 bytes"))
}

/// Same as [`derive`] but keyed by an integer, e.g. a sample index.
pub fn derive_index(master: u64, label: &str, index: u64) -> u64 {
    derive(master, &[label, &index.to_string()])
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn hash_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
