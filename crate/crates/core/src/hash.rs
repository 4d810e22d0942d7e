//! Stable 64-bit content hashes.
//!
//! Fixture keys, request ids and artifact references must not depend on the
//! platform or the process, so `std::hash` is not usable here. The hash is the
//! first eight bytes of SHA-256, big-endian.

use sha2::{Digest, Sha256};

pub fn stable_hash64(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_be_bytes(head)
}

/// Lowercase 16-character hex form of [`stable_hash64`].
pub fn stable_hash_hex(bytes: &[u8]) -> String {
    format!("{:016x}", stable_hash64(bytes))
}

/// Full SHA-256 hex digest, used for fixture fingerprints in exports.
pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}
