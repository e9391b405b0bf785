//! Counter-addressable pseudo-random numbers.
//!
//! Every variate is a pure function of a 64-bit seed, a stream label, and a
//! triple of indices. The generator absorbs those words with the SplitMix64
//! finalizer, so there is no sequential state: any slice of a batch can be
//! produced on any worker, in any order, and the values match a serial run
//! bit for bit. Normal variates come from the inverse CDF applied to the
//! uniform output, so one counter maps to exactly one draw.

use crate::normal::inverse_normal_cdf;

const GOLDEN_GAMMA: u64 = 0x9e37_79b9_7f4a_7c15;

/// Distinct consumers of randomness. Keeps draws made for different purposes
/// from ever sharing a counter even under the same seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    /// Brownian increments for simulated paths.
    PathNoise,
    /// Monte Carlo draws inside reference-value estimators.
    OracleNoise,
    /// Dense-network weight initialization.
    WeightInit,
    /// Variational-circuit angle initialization.
    AngleInit,
    /// Frozen encoder/decoder adapter initialization.
    AdapterInit,
    /// Initial-value head initialization.
    HeadInit,
    /// Optional minibatch shuffling.
    Shuffle,
    /// Derivation of per-run seeds inside a sweep.
    SeedDerivation,
}

impl Stream {
    fn tag(self) -> u64 {
        match self {
            Stream::PathNoise => 1,
            Stream::OracleNoise => 2,
            Stream::WeightInit => 3,
            Stream::AngleInit => 4,
            Stream::AdapterInit => 5,
            Stream::HeadInit => 6,
            Stream::Shuffle => 7,
            Stream::SeedDerivation => 8,
        }
    }
}

/// SplitMix64 finalizer (Stafford mix 13).
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[inline]
fn absorb(state: u64, word: u64) -> u64 {
    mix(state.wrapping_add(GOLDEN_GAMMA).wrapping_add(word))
}

/// Stateless generator keyed by (seed, stream).
#[derive(Debug, Clone, Copy)]
pub struct CounterRng {
    key: u64,
}

impl CounterRng {
    pub fn new(seed: u64, stream: Stream) -> Self {
        CounterRng {
            key: absorb(mix(seed), stream.tag()),
        }
    }

    /// Raw 64-bit word for the given counter triple.
    #[inline]
    pub fn raw(&self, i0: u64, i1: u64, i2: u64) -> u64 {
        absorb(absorb(absorb(self.key, i0), i1), i2)
    }

    /// Uniform draw in the open interval (0, 1).
    #[inline]
    pub fn uniform(&self, i0: u64, i1: u64, i2: u64) -> f64 {
        // 53 mantissa bits, offset by half a step so 0 and 1 are excluded.
        ((self.raw(i0, i1, i2) >> 11) as f64 + 0.5) * (1.0 / 9_007_199_254_740_992.0)
    }

    /// Standard normal draw via the inverse CDF.
    #[inline]
    pub fn normal(&self, i0: u64, i1: u64, i2: u64) -> f64 {
        inverse_normal_cdf(self.uniform(i0, i1, i2))
    }
}
