//! Reproducible random streams.
//!
//! A stream is a ChaCha8 generator keyed by a 64-bit seed and a 64-bit
//! stream id, so trials drawing from `(seed, trial)` never share state and
//! are independent of scheduling.

use alloc::vec::Vec;
use core::f64::consts::PI;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::{Error, Result, C64};

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self {
            seed,
            stream,
            inner,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)` with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform integer in `0..n` (Lemire's widening multiply with rejection).
    pub fn below(&mut self, n: usize) -> usize {
        assert!(n > 0, "below(0)");
        let n = n as u64;
        let threshold = n.wrapping_neg() % n;
        loop {
            let m = (self.next_u64() as u128) * (n as u128);
            if (m as u64) >= threshold {
                return (m >> 64) as usize;
            }
        }
    }

    pub fn sign(&mut self) -> f64 {
        if self.next_u64() >> 63 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// One draw from `N(0, 1/2) + i N(0, 1/2)` (Box-Muller), so `E|z|^2 = 1`.
    pub fn complex_gaussian(&mut self) -> C64 {
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let r = libm::sqrt(-libm::log(u1));
        let theta = 2.0 * PI * u2;
        C64::new(r * libm::cos(theta), r * libm::sin(theta))
    }

    /// Real standard normal.
    pub fn normal(&mut self) -> f64 {
        core::f64::consts::SQRT_2 * self.complex_gaussian().re
    }

    pub fn complex_gaussian_vec(&mut self, n: usize) -> Vec<C64> {
        (0..n).map(|_| self.complex_gaussian()).collect()
    }

    /// Uniformly random `k`-subset of `0..n` in draw order (partial
    /// Fisher-Yates).
    pub fn choose_distinct(&mut self, n: usize, k: usize) -> Vec<usize> {
        assert!(k <= n);
        let mut pool: Vec<usize> = (0..n).collect();
        for i in 0..k {
            let j = i + self.below(n - i);
            pool.swap(i, j);
        }
        pool.truncate(k);
        pool
    }
}

/// `n` i.i.d. `CN(0, 1)` entries.
pub fn sample_complex_gaussian(rng: &mut RngStream, n: usize) -> Result<Vec<C64>> {
    if n == 0 {
        return Err(Error::Empty);
    }
    Ok(rng.complex_gaussian_vec(n))
}

/// Mixes several 64-bit words into one seed (SplitMix64 finalizer chain).
pub fn mix_seed(parts: &[u64]) -> u64 {
    let mut h: u64 = 0x9E37_79B9_7F4A_7C15;
    for &p in parts {
        h ^= p;
        h = h.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = h;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        h = z ^ (z >> 31);
    }
    h
}
