//! Deterministic RNG plumbing.
//!
//! Every randomized routine takes a `u64` seed and derives a private stream
//! from it, so results are reproducible across runs and platforms. Distinct
//! call sites mix in a salt string to keep their streams independent.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// ChaCha stream for a root seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Derive a child seed from a root seed and a call-site salt. Uses a
/// splitmix-style finalizer over the seed and an FNV-1a hash of the salt.
pub fn child_seed(seed: u64, salt: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in salt.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = seed ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for a salted child stream.
pub fn child_rng(seed: u64, salt: &str) -> ChaCha8Rng {
    rng_from_seed(child_seed(seed, salt))
}
