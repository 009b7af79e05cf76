//! Seeded pseudo-random numbers that reproduce across implementations.
//!
//! The generator is the 64-bit linear congruential generator
//!
//! ```text
//! state' = state * 6364136223846793005 + 1442695040888963407   (mod 2^64)
//! ```
//!
//! seeded with `state = seed`. Each draw advances the state once and then
//! reads the new state; `next_f64` returns `(state >> 11) * 2^-53`, a value in
//! `[0, 1)`.

use crate::scalar::Scalar;

pub const LCG_MULTIPLIER: u64 = 6364136223846793005;
pub const LCG_INCREMENT: u64 = 1442695040888963407;

#[derive(Debug, Clone)]
pub struct Lcg64 {
    state: u64,
}

impl Lcg64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self
            .state
            .wrapping_mul(LCG_MULTIPLIER)
            .wrapping_add(LCG_INCREMENT);
        self.state
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` by multiply-shift on the high 32 bits.
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0);
        (((self.next_u64() >> 32) * n as u64) >> 32) as usize
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    /// Draw from the flat Dirichlet distribution on the `n`-simplex.
    pub fn simplex<T: Scalar>(&mut self, n: usize) -> Vec<T> {
        let raw: Vec<f64> = (0..n).map(|_| -(1.0 - self.next_f64()).ln()).collect();
        let total: f64 = raw.iter().sum();
        raw.into_iter().map(|x| T::lit(x / total)).collect()
    }

    /// Derive an independent stream for a sub-task.
    pub fn fork(&mut self, salt: u64) -> Lcg64 {
        Lcg64::new(self.next_u64() ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
    }
}
