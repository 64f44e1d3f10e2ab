//! Deterministic seed derivation.
//!
//! Independent work items (candidate sets, scenarios, replicates) get their own
//! RNG stream from a base seed and an item key. The split function is one
//! SplitMix64 step over the xor-combined input, so streams are reproducible
//! regardless of the order or thread in which work items run.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type IcpRng = ChaCha8Rng;

#[inline]
pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed for stream `key` derived from `base`.
pub fn derive_seed(base: u64, key: u64) -> u64 {
    splitmix64(splitmix64(base) ^ key.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// Order-sensitive key of an index set, for per-set RNG streams.
pub fn set_key(set: &[usize]) -> u64 {
    set.iter().fold(0x51_7C_C1_B7_27_22_0A_95, |acc, &i| splitmix64(acc ^ (i as u64 + 1)))
}

pub fn rng_from_seed(seed: u64) -> IcpRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rng_for(base: u64, key: u64) -> IcpRng {
    rng_from_seed(derive_seed(base, key))
}
