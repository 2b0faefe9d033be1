//! Pinned deterministic randomness for generators and search ordering.
//!
//! Everything seeded in this crate goes through ChaCha8 with a fixed key
//! derivation, so instances and orderings are reproducible from the textual
//! description alone, across platforms and library versions:
//!
//! - key: 32 bytes, little-endian `u64` seed in bytes 0..8, zeros elsewhere;
//!   stream and word position left at their defaults.
//! - draws: `next_u64`, reduced by rejection sampling (no modulo bias).
//! - shuffles: Fisher-Yates from the top index down, using those draws.

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Uniform draw from `0..m` by rejection.
pub(crate) fn uniform(rng: &mut ChaCha8Rng, m: u64) -> u64 {
    assert!(m > 0);
    let zone = u64::MAX - (u64::MAX % m);
    loop {
        let r = rng.next_u64();
        if r < zone {
            return r % m;
        }
    }
}

pub(crate) fn shuffle<T>(rng: &mut ChaCha8Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = uniform(rng, i as u64 + 1) as usize;
        items.swap(i, j);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Frozen outputs guard the key derivation and the stream defaults: if a
    /// dependency bump ever changes these, generated instances would silently
    /// change too.
    #[test]
    fn pinned_stream() {
        let mut rng = rng_from_seed(1);
        let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        assert_eq!(
            first,
            vec![
                7037237572835827407,
                5440448899038119230,
                14725191807199933458
            ]
        );
        let mut rng = rng_from_seed(42);
        assert_eq!(rng.next_u64(), 6424161053832095879);
    }

    #[test]
    fn uniform_stays_in_range() {
        let mut rng = rng_from_seed(7);
        for m in [1u64, 2, 3, 10, 97] {
            for _ in 0..200 {
                assert!(uniform(&mut rng, m) < m);
            }
        }
    }

    #[test]
    fn shuffle_is_a_permutation() {
        let mut rng = rng_from_seed(3);
        let mut v: Vec<u32> = (0..20).collect();
        shuffle(&mut rng, &mut v);
        let mut sorted = v.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..20).collect::<Vec<_>>());
    }
}
