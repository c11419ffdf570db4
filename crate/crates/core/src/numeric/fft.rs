//! Radix-2 unitary DFT.
//!
//! Forward: `X[k] = L^{-1/2} sum_j x[j] exp(-2 pi i j k / L)`; the inverse
//! uses the conjugate kernel with the same `L^{-1/2}` scale, so the pair is
//! exactly unitary.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::check_pow2;
use crate::{Result, C64};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// Precomputed twiddles and bit-reversal table for one power-of-two length.
#[derive(Debug, Clone)]
pub struct FftPlan {
    len: usize,
    twiddles: Vec<C64>,
    bitrev: Vec<u32>,
    scale: f64,
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        check_pow2(len)?;
        let twiddles = (0..len / 2)
            .map(|k| {
                let theta = -2.0 * PI * k as f64 / len as f64;
                C64::new(libm::cos(theta), libm::sin(theta))
            })
            .collect();
        let bits = len.trailing_zeros();
        let bitrev = (0..len as u32)
            .map(|i| if bits == 0 { 0 } else { i.reverse_bits() >> (32 - bits) })
            .collect();
        Ok(Self {
            len,
            twiddles,
            bitrev,
            scale: 1.0 / libm::sqrt(len as f64),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// In-place unitary transform. Panics if `data.len()` differs from the
    /// planned length.
    pub fn process(&self, data: &mut [C64], direction: Direction) {
        assert_eq!(data.len(), self.len, "fft buffer length");
        let n = self.len;
        for i in 0..n {
            let j = self.bitrev[i] as usize;
            if i < j {
                data.swap(i, j);
            }
        }
        let conj = direction == Direction::Inverse;
        let mut half = 1;
        while half < n {
            let stride = n / (2 * half);
            for start in (0..n).step_by(2 * half) {
                for k in 0..half {
                    let mut w = self.twiddles[k * stride];
                    if conj {
                        w = w.conj();
                    }
                    let a = data[start + k];
                    let b = data[start + k + half] * w;
                    data[start + k] = a + b;
                    data[start + k + half] = a - b;
                }
            }
            half *= 2;
        }
        for z in data.iter_mut() {
            *z *= self.scale;
        }
    }
}

/// Unitary DFT of `v` (length must be a power of two).
pub fn fft_unitary(v: &[C64], direction: Direction) -> Result<Vec<C64>> {
    let plan = FftPlan::new(v.len())?;
    let mut out = v.to_vec();
    plan.process(&mut out, direction);
    Ok(out)
}

/// Dense unitary DFT entry `F[j, k]`, valid for any length.
pub fn dft_entry(len: usize, j: usize, k: usize) -> C64 {
    // reduce the phase index first so large products stay exact
    let idx = (j * k) % len;
    let theta = -2.0 * PI * idx as f64 / len as f64;
    C64::new(libm::cos(theta), libm::sin(theta)) / libm::sqrt(len as f64)
}
