//! Walsh-Hadamard transform in Sylvester (natural) ordering.

use alloc::vec::Vec;

use super::check_pow2;
use crate::{Result, C64};

/// Unnormalized in-place transform: `data <- H_L data` with `H_L` the +-1
/// Sylvester matrix. Length must be a power of two (checked by callers).
pub fn fwht_in_place(data: &mut [C64]) {
    let n = data.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for start in (0..n).step_by(2 * half) {
            for i in start..start + half {
                let a = data[i];
                let b = data[i + half];
                data[i] = a + b;
                data[i + half] = a - b;
            }
        }
        half *= 2;
    }
}

/// `L^{-1/2} H_L v`. Self-inverse.
pub fn fwht_unitary(v: &[C64]) -> Result<Vec<C64>> {
    check_pow2(v.len())?;
    let mut out = v.to_vec();
    fwht_in_place(&mut out);
    let s = 1.0 / libm::sqrt(v.len() as f64);
    out.iter_mut().for_each(|z| *z *= s);
    Ok(out)
}

/// Entry `(i, j)` of the +-1 Sylvester Hadamard matrix.
pub fn hadamard_entry(i: usize, j: usize) -> f64 {
    if (i & j).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}
