//! Deterministic seed derivation.
//!
//! Every stochastic routine in this crate is driven by a ChaCha stream
//! cipher seeded from explicit 64-bit seeds, so identical inputs produce
//! identical output on every platform. Monte Carlo replicates are keyed by
//! `(base_seed, worker_index, replicate_index)`: a worker layout change
//! reshuffles summation order but never reuses a stream.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;

/// Domain-separation tag; keeps derived streams disjoint from naive
/// `seed_from_u64` usage elsewhere.
const STREAM_TAG: u64 = 0x66_73_62_6d_73_65_65_64; // "fsbmseed"

/// Builds the 32-byte ChaCha seed for a given `(base, worker, replicate)`.
pub fn derive_seed(base: u64, worker: u64, replicate: u64) -> [u8; 32] {
    let mut seed = [0u8; 32];
    seed[0..8].copy_from_slice(&base.to_le_bytes());
    seed[8..16].copy_from_slice(&worker.to_le_bytes());
    seed[16..24].copy_from_slice(&replicate.to_le_bytes());
    seed[24..32].copy_from_slice(&STREAM_TAG.to_le_bytes());
    seed
}

/// RNG for one Monte Carlo replicate.
pub fn replicate_rng(base: u64, worker: u64, replicate: u64) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(derive_seed(base, worker, replicate))
}

/// RNG for a single-stream task (grid generation, instance sampling).
pub fn task_rng(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::from_seed(derive_seed(seed, u64::MAX, u64::MAX))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::RngCore;

    #[test]
    fn streams_are_disjoint_and_reproducible() {
        let a1 = replicate_rng(1, 0, 0).next_u64();
        let a2 = replicate_rng(1, 0, 0).next_u64();
        let b = replicate_rng(1, 0, 1).next_u64();
        let c = replicate_rng(1, 1, 0).next_u64();
        assert_eq!(a1, a2);
        assert_ne!(a1, b);
        assert_ne!(a1, c);
        assert_ne!(b, c);
    }
}
