//! Deterministic RNG streams. Every replicate, bootstrap draw and generator
//! purpose gets its own stream derived from the master seed by a counter
//! mix, so results do not depend on execution order or thread count.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 step.
fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E3779B97F4A7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Fold a list of tags into one well-mixed 64-bit seed.
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut acc = 0x6A09E667F3BCC909u64;
    for &p in parts {
        acc = splitmix64(acc ^ p);
    }
    splitmix64(acc)
}

/// A fresh stream keyed by `(master seed, tags...)`.
pub fn stream(parts: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(mix_seed(parts))
}

/// Purpose tags to keep streams for different uses disjoint.
pub mod tag {
    pub const DATA: u64 = 0x01;
    pub const BOOT: u64 = 0x02;
    pub const TRUTH: u64 = 0x03;
}
