//! Reproducible random streams.
//!
//! Every stochastic routine in the crate takes an explicit [`RandomStream`].
//! The generator is ChaCha8 (`rand_chacha`), keyed with
//! `ChaCha8Rng::seed_from_u64(seed)`; independent substreams of the same seed
//! use ChaCha's 64-bit stream selector. Both the key expansion and the
//! keystream are specified bit-for-bit, so a given `(seed, stream)` pair yields
//! the same sequence on every platform.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct RandomStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RandomStream {
    /// Stream 0 of `seed`.
    pub fn new(seed: u64) -> Self {
        Self::substream(seed, 0)
    }

    /// Stream `index` of `seed`. Distinct indices give statistically
    /// independent sequences; use one per parallel worker or repetition.
    pub fn substream(seed: u64, index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(index);
        Self {
            seed,
            stream: index,
            inner,
        }
    }

    /// A fresh stream derived from this one's seed; does not advance `self`.
    pub fn split(&self, index: u64) -> Self {
        Self::substream(self.seed, index)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RandomStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
