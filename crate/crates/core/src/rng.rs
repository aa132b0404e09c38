//! Deterministic random number generation.
//!
//! Everything random in this crate flows from a single `u64` seed through
//! SplitMix64, either as a sequential stream or as a counter-based keyed
//! draw. The keyed form makes per-element randomness (e.g. one score per
//! edge) independent of evaluation order, so parallel and serial generation
//! agree bit for bit.

/// One SplitMix64 mixing round.
#[inline]
fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

const GOLDEN_GAMMA: u64 = 0x9e3779b97f4a7c15;

/// Sequential SplitMix64 stream.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        mix(self.state)
    }

    /// Uniform draw in `[0, 1)` with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in `[-1, 1)`.
    pub fn next_signed_unit(&mut self) -> f64 {
        2.0 * self.next_unit() - 1.0
    }

    /// Uniform draw in `[0, n)`. `n` must be nonzero.
    pub fn next_below(&mut self, n: u64) -> u64 {
        debug_assert!(n > 0);
        ((self.next_u64() as u128 * n as u128) >> 64) as u64
    }

    /// Uniform draw in `[lo, hi]` (inclusive).
    pub fn next_in(&mut self, lo: u64, hi: u64) -> u64 {
        debug_assert!(lo <= hi);
        lo + self.next_below(hi - lo + 1)
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.next_below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }
}

/// Counter-based draw keyed by `(seed, index)`.
pub fn keyed_u64(seed: u64, index: u64) -> u64 {
    mix(mix(seed ^ index.wrapping_mul(GOLDEN_GAMMA)).wrapping_add(GOLDEN_GAMMA))
}

/// Keyed uniform draw in `[-1, 1)`.
pub fn keyed_signed_unit(seed: u64, index: u64) -> f64 {
    2.0 * ((keyed_u64(seed, index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)) - 1.0
}
