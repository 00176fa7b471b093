//! Seeded RNG construction and stream derivation.
//!
//! Every stochastic routine in this crate takes an explicit integer seed and
//! draws from a ChaCha8 stream built from it. Independent work units
//! (bootstrap replicates, simulation paths, per-day pipeline tests) run on
//! their own streams derived from the master seed and a context label, so
//! results never depend on evaluation order or thread scheduling.
//!
//! Derivation scheme: the 32-byte ChaCha8 key is
//! `SHA-256(master_le || len(label) || label || index_le)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

fn derive_key(master: u64, label: &str, index: u64) -> [u8; 32] {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update((label.len() as u64).to_le_bytes());
    hasher.update(label.as_bytes());
    hasher.update(index.to_le_bytes());
    hasher.finalize().into()
}

/// RNG for the work unit `(label, index)` under `master`.
pub fn derived_rng(master: u64, label: &str, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::from_seed(derive_key(master, label, index))
}

/// A derived 64-bit seed, for handing a sub-seed to an API that takes one.
pub fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    let key = derive_key(master, label, index);
    u64::from_le_bytes(key[..8].try_into().unwrap())
}
