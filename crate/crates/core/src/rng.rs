//! Counter-based random streams.
//!
//! A stream is identified by `(seed, index)`; draws within a stream are
//! sequential. Two streams with the same pair produce the same values no
//! matter which thread creates them, which is what keeps Monte Carlo output
//! independent of the worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Builds streams for one seed. Cloning the keyed base generator is much
/// cheaper than re-deriving the key for every stream.
#[derive(Clone, Debug)]
pub struct StreamFactory {
    base: ChaCha8Rng,
}

impl StreamFactory {
    pub fn new(seed: u64) -> Self {
        StreamFactory { base: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn stream(&self, index: u64) -> RandomStream {
        let mut rng = self.base.clone();
        rng.set_stream(index);
        rng.set_word_pos(0);
        RandomStream { rng }
    }
}

#[derive(Clone, Debug)]
pub struct RandomStream {
    rng: ChaCha8Rng,
}

impl RandomStream {
    pub fn new(seed: u64, index: u64) -> Self {
        StreamFactory::new(seed).stream(index)
    }

    /// Uniform draw from [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
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
