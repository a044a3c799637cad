//! Child-seed derivation. Every logical estimation task hashes the master
//! seed with a task label so per-entry sampling is reproducible and
//! independent of evaluation order.

use sha2::{Digest, Sha256};

/// First 8 bytes (little endian) of SHA-256(master ‖ label).
pub fn child_seed(master: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(master.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest >= 8 bytes"))
}
