//! Seeded, platform-independent randomness.
//!
//! All draws go through `u32`/`u64` ranges so the stream never depends on
//! the width of `usize`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Name of the stream algorithm, recorded in manifests.
pub const RNG_ALGORITHM: &str = "chacha8-v1";

#[derive(Clone, Debug)]
pub struct SeededRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// The seed this stream was created from.
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Uniform in `0..n`. Panics if `n == 0`.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = u32::try_from(n).expect("range too large");
        self.inner.random_range(0..n) as usize
    }

    /// Uniform in `lo..=hi`.
    pub fn range_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        assert!(lo <= hi, "empty range {lo}..={hi}");
        lo + self.below(hi - lo + 1)
    }

    pub fn chance(&mut self, numerator: u32, denominator: u32) -> bool {
        self.inner.random_range(0..denominator) < numerator
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    /// Fisher-Yates over `u32` draws.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

/// Mix a master seed with a stream index into an independent sub-seed
/// (splitmix64 finalizer over both words).
pub fn derive_seed(master: u64, index: u64) -> u64 {
    fn mix(mut z: u64) -> u64 {
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    mix(mix(master.wrapping_add(0x9E37_79B9_7F4A_7C15)) ^ index.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// `derive_seed` folded over several indices.
pub fn derive_seed_path(master: u64, path: &[u64]) -> u64 {
    path.iter().fold(master, |acc, &i| derive_seed(acc, i))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_stream() {
        let mut a = SeededRng::new(99);
        let mut b = SeededRng::new(99);
        let xs: Vec<usize> = (0..64).map(|_| a.below(1000)).collect();
        let ys: Vec<usize> = (0..64).map(|_| b.below(1000)).collect();
        assert_eq!(xs, ys);
    }

    #[test]
    fn stream_is_pinned() {
        // Frozen so an accidental algorithm or dependency change is caught.
        let mut rng = SeededRng::new(0);
        let first: Vec<u64> = (0..3).map(|_| rng.next_u64()).collect();
        assert_eq!(first, [13080132717333068652, 8594738769458413623, 12896916468484187878]);
        assert_eq!((0..5).map(|_| rng.below(100)).collect::<Vec<_>>(), [56, 6, 19, 87, 58]);
        assert_eq!(derive_seed(1, 0), 15916886550466581944);
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }

    #[test]
    fn range_inclusive_hits_both_ends() {
        let mut rng = SeededRng::new(3);
        let draws: Vec<usize> = (0..200).map(|_| rng.range_inclusive(3, 5)).collect();
        assert!(draws.contains(&3) && draws.contains(&5));
        assert!(draws.iter().all(|d| (3..=5).contains(d)));
    }
}
