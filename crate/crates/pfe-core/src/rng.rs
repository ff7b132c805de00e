//! Seed derivation for reproducible, scheduling-independent random streams.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derive an independent stream seed from a base seed and a salt (restart
/// index, trial index, ...). Streams derived from distinct salts stay
/// decorrelated no matter how work is scheduled across threads.
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    splitmix64(base ^ splitmix64(salt))
}

/// The deterministic generator used throughout the crate.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn derived_streams_are_stable_and_distinct() {
        let a = derive_seed(42, 0);
        let b = derive_seed(42, 1);
        assert_eq!(a, derive_seed(42, 0));
        assert_ne!(a, b);
        let x: u64 = rng_from_seed(a).gen();
        let y: u64 = rng_from_seed(a).gen();
        assert_eq!(x, y);
    }
}
