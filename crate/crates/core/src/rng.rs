//! Seeded sampling used by every random sweep.
//!
//! The generator is xoshiro256++ whose 256-bit state is filled from the
//! 64-bit seed by four successive SplitMix64 outputs. A uniform double in
//! `[0, 1)` is `(next_u64 >> 11) * 2^-53`, and `uniform(lo, hi)` is
//! `lo + (hi - lo) * u`. Any language with those two reference generators
//! reproduces the same sample streams from the same seed.

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone)]
pub struct SweepRng(Xoshiro256PlusPlus);

impl SweepRng {
    pub fn new(seed: u64) -> Self {
        Self(Xoshiro256PlusPlus::seed_from_u64(seed))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 bits of resolution.
    pub fn unit(&mut self) -> f64 {
        (self.0.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.unit()
    }

    pub fn vector(&mut self, len: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..len).map(|_| self.uniform(lo, hi)).collect()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn pick(&mut self, lo: usize, hi: usize) -> usize {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as usize
    }
}
