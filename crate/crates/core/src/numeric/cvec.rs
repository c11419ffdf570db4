//! Helpers over `[C64]` slices. Inner products are conjugate-linear in the
//! first argument: `dot(a, b) = a^H b`.

use alloc::vec::Vec;

use crate::{Error, Result, C64};

pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(u, v)| u.conj() * v).sum()
}

pub fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    libm::sqrt(norm_sqr(v))
}

/// Largest entry magnitude.
pub fn norm_inf(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn scale(v: &[C64], alpha: C64) -> Vec<C64> {
    v.iter().map(|z| alpha * z).collect()
}

pub fn scale_real_in_place(v: &mut [C64], alpha: f64) {
    v.iter_mut().for_each(|z| *z *= alpha);
}

/// `y += alpha * x`
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(u, v)| u - v).collect()
}

/// `a - alpha * b`
pub fn sub_scaled(a: &[C64], alpha: f64, b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(u, v)| u - v * alpha).collect()
}

pub fn is_finite(v: &[C64]) -> bool {
    v.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Returns `v / ||v||`, or an error when `v` is zero.
pub fn normalized(v: &[C64], what: &'static str) -> Result<Vec<C64>> {
    let n = norm(v);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::ZeroVector(what));
    }
    Ok(v.iter().map(|z| z / n).collect())
}

pub fn check_len(what: &'static str, v: &[C64], expected: usize) -> Result<()> {
    if v.len() != expected {
        return Err(Error::Dimension {
            what,
            expected,
            got: v.len(),
        });
    }
    Ok(())
}

/// Validates the `ComplexVec` contract: non-empty with finite entries.
pub fn check_vec(what: &'static str, v: &[C64]) -> Result<()> {
    if v.is_empty() {
        return Err(Error::Empty);
    }
    if !is_finite(v) {
        return Err(Error::NonFinite(what));
    }
    Ok(())
}

/// `e_i` in `C^n`.
pub fn unit(n: usize, i: usize) -> Vec<C64> {
    let mut v = alloc::vec![C64::new(0.0, 0.0); n];
    v[i] = C64::new(1.0, 0.0);
    v
}
