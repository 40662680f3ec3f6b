//! Seeded random numbers with a pinned algorithm.
//!
//! Everything stochastic in this crate (fold assignment, synthetic data) goes
//! through [`SeededRng`], which is ChaCha8 keyed from a `u64` seed. Each
//! logical stream (a record, a fold shuffle, a macro series) selects its own
//! ChaCha stream number, so output does not depend on how work is sharded.
//! Uniforms use the top 53 bits of each 64-bit word; normals use the
//! Box-Muller transform, one draw per pair of uniforms.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

#[derive(Clone, Debug)]
pub struct SeededRng {
    inner: ChaCha8Rng,
}

impl SeededRng {
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Independent generator for stream `stream` under master seed `seed`.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { inner }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on (0, 1).
    pub fn uniform_open(&mut self) -> f64 {
        loop {
            let u = self.uniform();
            if u > 0.0 {
                return u;
            }
        }
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform_open();
        let u2 = self.uniform();
        crate::math::sqrt(-2.0 * crate::math::ln(u1)) * libm::cos(2.0 * core::f64::consts::PI * u2)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    /// Uniform integer in `0..n` (rejection sampling, no modulo bias).
    pub fn below(&mut self, n: u64) -> u64 {
        assert!(n > 0, "below(0)");
        let zone = u64::MAX - (u64::MAX % n) - 1;
        loop {
            let v = self.next_u64();
            if v <= zone {
                return v % n;
            }
        }
    }

    pub fn shuffle<T>(&mut self, xs: &mut [T]) {
        for i in (1..xs.len()).rev() {
            let j = self.below(i as u64 + 1) as usize;
            xs.swap(i, j);
        }
    }

    /// Index drawn from a cumulative (non-decreasing) weight table.
    pub fn categorical(&mut self, cumulative: &[f64]) -> usize {
        let total = *cumulative.last().expect("empty distribution");
        let u = self.uniform() * total;
        cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = {
            let mut r = SeededRng::with_stream(7, 3);
            (0..16).map(|_| r.next_u64()).collect()
        };
        let b: Vec<u64> = {
            let mut r = SeededRng::with_stream(7, 3);
            (0..16).map(|_| r.next_u64()).collect()
        };
        let c: Vec<u64> = {
            let mut r = SeededRng::with_stream(7, 4);
            (0..16).map(|_| r.next_u64()).collect()
        };
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn normal_moments() {
        let mut r = SeededRng::new(1);
        let xs: Vec<f64> = (0..200_000).map(|_| r.normal()).collect();
        let m = crate::math::mean(&xs);
        let sd = crate::math::std_dev(&xs);
        assert!(m.abs() < 0.01, "{m}");
        assert!((sd - 1.0).abs() < 0.01, "{sd}");
    }

    #[test]
    fn categorical_respects_weights() {
        let mut r = SeededRng::new(2);
        let cum = [1.0, 1.0, 4.0];
        let mut counts = [0usize; 3];
        for _ in 0..40_000 {
            counts[r.categorical(&cum)] += 1;
        }
        assert_eq!(counts[1], 0);
        assert!((counts[0] as f64 / 40_000.0 - 0.25).abs() < 0.01);
    }
}
