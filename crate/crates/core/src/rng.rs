//! Seeding rules.
//!
//! Every random draw in the crate comes from a [`ChaCha8Rng`] seeded with a
//! 64-bit value. Independent streams (replication, class, method, ...) get
//! their own seed via [`child_seed`], a SplitMix64-based hash of the parent
//! seed and the stream key, so streams can be generated in any order or in
//! parallel with identical results.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
#[inline]
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Stable hash of `(parent, key[0], key[1], ...)`.
pub fn child_seed(parent: u64, key: &[u64]) -> u64 {
    key.iter()
        .fold(mix64(parent), |acc, &k| mix64(acc ^ mix64(k)))
}

/// Seed for class `g` of replication `rep`.
pub fn class_seed(master: u64, rep: u64, class: u8) -> u64 {
    child_seed(master, &[rep, u64::from(class)])
}
