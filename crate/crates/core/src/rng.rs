//! Counter-based keyed random streams.
//!
//! Every random draw in the toolkit comes from a ChaCha stream whose key is
//! the user seed plus a domain tag, whose stream id is an entity index
//! (region, view, subset) and whose word position is fixed per slot. Draws
//! therefore never depend on call order or thread schedule.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// Domain tags keep unrelated consumers of the same seed apart.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Domain {
    Recolor = 1,
    DropView = 2,
    GeomSample = 3,
    MmdSubset = 4,
}

/// Words reserved per slot; a slot never reads past this many u32 words.
const SLOT_WORDS: u128 = 1 << 16;

/// Returns a generator keyed by `(seed, domain, index)`, positioned at `slot`.
pub fn keyed(seed: u64, domain: Domain, index: u64, slot: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(domain as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index);
    rng.set_word_pos(slot as u128 * SLOT_WORDS);
    rng
}

/// Stable 64-bit hash of a string key (used for scene ids).
pub fn hash_str(s: &str) -> u64 {
    let digest = Sha256::digest(s.as_bytes());
    let mut b = [0u8; 8];
    b.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(b)
}
