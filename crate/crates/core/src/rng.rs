//! Reproducible Gaussian streams.
//!
//! Each stream is a ChaCha12 generator keyed by the seed with its own
//! 64-bit stream id, so shards of a simulation draw from disjoint,
//! independently addressable sequences and the result never depends on
//! how shards are scheduled. Normals come from the inverse CDF.

use rand_chacha::ChaCha12Rng;
use rand_core::{RngCore, SeedableRng};

use crate::specfun::gaussian_quantile;

const TWO_POW_M53: f64 = 1.0 / (1u64 << 53) as f64;

#[derive(Debug, Clone)]
pub struct NormalStream {
    rng: ChaCha12Rng,
}

impl NormalStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { rng }
    }

    /// Uniform on the open interval (0, 1), 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) as f64 + 0.5) * TWO_POW_M53
    }

    pub fn normal(&mut self) -> f64 {
        gaussian_quantile(self.uniform()).expect("uniform draw lies in (0, 1)")
    }
}
