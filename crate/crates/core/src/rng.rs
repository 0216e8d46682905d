//! Counter-based random numbers.
//!
//! Every draw is a pure function of `(seed, stream, counter)`, computed with
//! the SplitMix64 finalizer. There is no generator state to thread through
//! workers, so an ensemble can be split across any number of threads and
//! still reproduce the same points bit for bit.

use std::f64::consts::TAU;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent streams keyed by a seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CounterRng {
    key: u64,
}

/// Stream tags. Distinct purposes never share a stream.
pub mod stream {
    pub const UNIFORM_POINTS: u64 = 1;
    pub const HARMONIC_POINTS: u64 = 2;
    pub const FAMILY_ANGLES: u64 = 3;
    pub const ARC_POINTS: u64 = 4;
    pub const TRIPLES: u64 = 5;
    pub const TAIL_BITS: u64 = 6;

}

impl CounterRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let key = mix64(seed ^ mix64(stream.wrapping_add(GOLDEN_GAMMA)));
        Self { key }
    }

    #[inline]
    pub fn u64_at(&self, counter: u64) -> u64 {
        mix64(self.key.wrapping_add(counter.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    #[inline]
    pub fn f64_at(&self, counter: u64) -> f64 {
        (self.u64_at(counter) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform angle on `[0, 2π)`.
    #[inline]
    pub fn angle_at(&self, counter: u64) -> f64 {
        let a = TAU * self.f64_at(counter);
        if a >= TAU {
            0.0
        } else {
            a
        }
    }

    /// Uniform index in `0..n`.
    #[inline]
    pub fn index_at(&self, counter: u64, n: usize) -> usize {
        ((self.u64_at(counter) as u128 * n as u128) >> 64) as usize
    }
}
