//! Seeded pseudo-random streams.
//!
//! Every stochastic component (weight initialization, random logits,
//! dataset shuffles, instance generators) draws from xoshiro256++ seeded
//! through SplitMix64 expansion of a 64-bit seed, so a run is reproduced
//! exactly by its root seed.

use rand::SeedableRng;
use rand_xoshiro::Xoshiro256PlusPlus;

pub type Rng = Xoshiro256PlusPlus;

pub fn seeded(seed: u64) -> Rng {
    Xoshiro256PlusPlus::seed_from_u64(seed)
}

/// Derives an independent child seed from a root seed and a stream label.
pub fn derive(seed: u64, stream: u64) -> u64 {
    // SplitMix64 finalizer over the pair.
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
