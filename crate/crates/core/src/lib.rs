//! Nicknames for group signatures.

pub mod algebra;
pub mod cli;
pub mod ds;
pub mod harness;
pub mod ngs;
pub mod sigma;
pub mod nickhat;

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

/// Deterministic RNG for one labelled step of a seeded run.
pub fn derive_rng(seed: u64, label: &str, index: u64) -> ChaCha20Rng {
    let mut h = Sha256::new();
    h.update(seed.to_be_bytes());
    h.update((label.len() as u32).to_be_bytes());
    h.update(label.as_bytes());
    h.update(index.to_be_bytes());
    ChaCha20Rng::from_seed(h.finalize().into())
}
