//! Seedable, splittable random streams.
//!
//! Every stochastic operation in the crate takes a [`RandomStream`] explicitly.
//! Child streams are derived from a parent key and a label, so a run that
//! splits per pair (or per seed, per phase) is reproducible regardless of the
//! order in which the children are consumed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// SplitMix64 finalizer.
fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Deterministic random generator with cheap derivation of independent children.
#[derive(Debug, Clone)]
pub struct RandomStream {
    key: u64,
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64) -> Self {
        Self {
            key: seed,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Derives a child stream from this stream's key and `label`.
    ///
    /// The child depends only on the key the parent was created with, not on
    /// how much of the parent has been consumed.
    pub fn split(&self, label: u64) -> Self {
        let key = mix64(self.key ^ mix64(label.wrapping_add(0x632b_e59b_d9b4_e019)));
        Self::new(key)
    }

    /// The key this stream was created from.
    pub fn key(&self) -> u64 {
        self.key
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        // 53 random mantissa bits
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Fair coin.
    pub fn coin(&mut self) -> bool {
        self.rng.next_u32() & 1 == 1
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        assert!(n > 0, "index range must be nonempty");
        use rand::Rng;
        self.rng.random_range(0..n)
    }

    /// Standard normal draw.
    pub fn standard_normal(&mut self) -> f64 {
        use rand_distr::{Distribution, StandardNormal};
        StandardNormal.sample(&mut self.rng)
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}
