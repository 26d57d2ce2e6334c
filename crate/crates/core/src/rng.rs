//! Counter-based substreams for reproducible parallel sampling.
//!
//! A substream is identified by `(master_seed, index)`. Its 64-bit key is
//!
//! ```text
//! key = mix64(mix64(master_seed) ^ index * GAMMA)
//! ```
//!
//! and its `c`-th output (`c = 1, 2, ...`) is `mix64(key + c * GAMMA)`, i.e. a
//! SplitMix64 sequence started at `key`. `mix64` is the SplitMix64 finalizer
//! and `GAMMA` the 64-bit golden-ratio increment. Outputs are a pure function
//! of `(master_seed, index, c)`, so substreams can be handed to any worker in
//! any order.

use rand_core::{impls, Error as RandError, RngCore};

pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output finalizer; a bijection on `u64`.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Key of substream `index` under `master_seed`. Injective in `index` for a
/// fixed seed.
#[inline]
pub fn substream_key(master_seed: u64, index: u64) -> u64 {
    mix64(mix64(master_seed) ^ index.wrapping_mul(GAMMA))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substream {
    key: u64,
    counter: u64,
}

impl Substream {
    pub fn new(master_seed: u64, index: u64) -> Self {
        Substream {
            key: substream_key(master_seed, index),
            counter: 0,
        }
    }

    /// Number of 64-bit words drawn so far.
    pub fn position(&self) -> u64 {
        self.counter
    }
}

impl RngCore for Substream {
    #[inline]
    fn next_u64(&mut self) -> u64 {
        self.counter = self.counter.wrapping_add(1);
        mix64(self.key.wrapping_add(self.counter.wrapping_mul(GAMMA)))
    }

    #[inline]
    fn next_u32(&mut self) -> u32 {
        (self.next_u64() >> 32) as u32
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        impls::fill_bytes_via_next(self, dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> Result<(), RandError> {
        self.fill_bytes(dest);
        Ok(())
    }
}
