//! The lifted map `A(Z) = { b_l^* Z a_l }` and its adjoint
//! `A^*(z) = sum_l z_l b_l a_l^*`, evaluated on rank-one arguments without
//! forming `K x N` matrices.

use alloc::vec::Vec;

use crate::ensembles::SubspaceOperators;
use crate::numeric::{cvec, DenseMatrix, RngStream};
use crate::objective::incoherence_mu2;
use crate::{Error, Result, C64};

#[derive(Debug, Clone)]
pub struct LiftedOperator {
    ops: SubspaceOperators,
}

impl LiftedOperator {
    pub fn new(ops: SubspaceOperators) -> Self {
        Self { ops }
    }

    pub fn ops(&self) -> &SubspaceOperators {
        &self.ops
    }

    pub fn l(&self) -> usize {
        self.ops.l()
    }

    pub fn k(&self) -> usize {
        self.ops.k()
    }

    pub fn n(&self) -> usize {
        self.ops.n()
    }

    /// `A(h x^*) = (B h) .* conj(A x)`.
    pub fn forward_rank1(&self, h: &[C64], x: &[C64]) -> Result<Vec<C64>> {
        cvec::check_len("h", h, self.k())?;
        cvec::check_len("x", x, self.n())?;
        Ok(hadamard_conj(&self.ops.b.apply(h), &self.ops.a.apply(x)))
    }

    /// `A^*(z) x = B^H (z .* A x)`.
    pub fn adjoint_apply_right(&self, z: &[C64], x: &[C64]) -> Result<Vec<C64>> {
        cvec::check_len("z", z, self.l())?;
        cvec::check_len("x", x, self.n())?;
        let ax = self.ops.a.apply(x);
        let w: Vec<C64> = z.iter().zip(&ax).map(|(a, b)| a * b).collect();
        Ok(self.ops.b.adjoint(&w))
    }

    /// `(A^*(z))^H h = A^H (conj(z) .* B h)`.
    pub fn adjoint_apply_left(&self, z: &[C64], h: &[C64]) -> Result<Vec<C64>> {
        cvec::check_len("z", z, self.l())?;
        cvec::check_len("h", h, self.k())?;
        let bh = self.ops.b.apply(h);
        let w: Vec<C64> = z.iter().zip(&bh).map(|(a, b)| a.conj() * b).collect();
        Ok(self.ops.a.adjoint(&w))
    }

    /// Both matvecs of one power-iteration sweep: `(A^*(y) v, A^*(y)^H u)`.
    pub fn adjoint_power_step(
        &self,
        y: &[C64],
        v: &[C64],
        u: &[C64],
    ) -> Result<(Vec<C64>, Vec<C64>)> {
        Ok((self.adjoint_apply_right(y, v)?, self.adjoint_apply_left(y, u)?))
    }

    /// Dense `L x (K N)` matrix of the lifted map, for testing small cases.
    pub fn dense_lifted_matrix(&self) -> Result<DenseLifted> {
        DenseLifted::new(&self.ops)
    }
}

/// `a .* conj(b)`
pub(crate) fn hadamard_conj(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().zip(b).map(|(u, v)| u * v.conj()).collect()
}

pub const DENSE_LIFT_LIMIT: usize = 4096;

/// Materialized lifted operator. Column index `i + j K` corresponds to entry
/// `Z[i, j]` (column-major `vec`), so `matrix * vec(Z) = A(Z)`.
#[derive(Debug, Clone)]
pub struct DenseLifted {
    k: usize,
    n: usize,
    matrix: DenseMatrix,
}

impl DenseLifted {
    pub fn new(ops: &SubspaceOperators) -> Result<Self> {
        let (l, k, n) = (ops.l(), ops.k(), ops.n());
        if k * n > DENSE_LIFT_LIMIT {
            return Err(Error::SizeGuard {
                size: k * n,
                limit: DENSE_LIFT_LIMIT,
            });
        }
        let b = ops.b.materialize();
        let a = ops.a.materialize();
        // b_l^* Z a_l = sum_ij B[l,i] Z[i,j] conj(A[l,j])
        let matrix = DenseMatrix::from_fn(l, k * n, |row, col| {
            let (i, j) = (col % k, col / k);
            b.get(row, i) * a.get(row, j).conj()
        });
        Ok(Self { k, n, matrix })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    /// `A(Z)` for a `K x N` matrix `Z`.
    pub fn apply(&self, z: &DenseMatrix) -> Vec<C64> {
        assert_eq!((z.rows(), z.cols()), (self.k, self.n));
        self.matrix.matvec(&vec_col_major(z))
    }

    /// `A^*(w)` as a `K x N` matrix.
    pub fn adjoint(&self, w: &[C64]) -> DenseMatrix {
        let v = self.matrix.adjoint_matvec(w);
        DenseMatrix::from_fn(self.k, self.n, |i, j| v[i + j * self.k])
    }
}

fn vec_col_major(z: &DenseMatrix) -> Vec<C64> {
    let mut v = Vec::with_capacity(z.rows() * z.cols());
    for j in 0..z.cols() {
        for i in 0..z.rows() {
            v.push(z.get(i, j));
        }
    }
    v
}

/// `h x^*` as a dense `K x N` matrix.
pub fn outer(h: &[C64], x: &[C64]) -> DenseMatrix {
    DenseMatrix::from_fn(h.len(), x.len(), |i, j| h[i] * x[j].conj())
}

/// Ground truth of a synthetic instance.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub h0: Vec<C64>,
    pub x0: Vec<C64>,
    /// `||h0|| ||x0|| = ||h0 x0^*||_F`
    pub d0: f64,
    pub mu_h2: f64,
}

impl Truth {
    pub fn new(h0: Vec<C64>, x0: Vec<C64>, ops: &SubspaceOperators) -> Result<Self> {
        cvec::check_len("h0", &h0, ops.k())?;
        cvec::check_len("x0", &x0, ops.n())?;
        let d0 = cvec::norm(&h0) * cvec::norm(&x0);
        if d0 <= 0.0 || !d0.is_finite() {
            return Err(Error::ZeroVector("ground truth"));
        }
        let mu_h2 = incoherence_mu2(&h0, &ops.b)?;
        Ok(Self { h0, x0, d0, mu_h2 })
    }

    /// Rescales to `||h0|| = ||x0|| = sqrt(d0)`; `h0 x0^*` is unchanged.
    pub fn balanced(mut self) -> Self {
        let nh = cvec::norm(&self.h0);
        let nx = cvec::norm(&self.x0);
        let s = libm::sqrt(nx / nh);
        cvec::scale_real_in_place(&mut self.h0, s);
        cvec::scale_real_in_place(&mut self.x0, 1.0 / s);
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub y: Vec<C64>,
    pub sigma: f64,
    pub truth: Option<Truth>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseMode {
    /// `e ~ CN(0, sigma^2 d0^2 / L I)`.
    Absolute { d0: f64 },
    /// `e = sigma ||y0|| w / ||w||` with `w` standard complex Gaussian.
    Relative,
}

/// Returns `(y0 + e, e)`. With `sigma == 0` no randomness is consumed.
pub fn add_noise(
    y0: &[C64],
    sigma: f64,
    rng: &mut RngStream,
    mode: NoiseMode,
) -> Result<(Vec<C64>, Vec<C64>)> {
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter("noise level must be a finite value >= 0"));
    }
    let l = y0.len();
    if sigma == 0.0 {
        return Ok((y0.to_vec(), alloc::vec![C64::new(0.0, 0.0); l]));
    }
    let w = rng.complex_gaussian_vec(l);
    let e = match mode {
        NoiseMode::Absolute { d0 } => {
            let s = sigma * d0 / libm::sqrt(l as f64);
            cvec::scale(&w, C64::new(s, 0.0))
        }
        NoiseMode::Relative => {
            let s = sigma * cvec::norm(y0) / cvec::norm(&w);
            cvec::scale(&w, C64::new(s, 0.0))
        }
    };
    let y = y0.iter().zip(&e).map(|(a, b)| a + b).collect();
    Ok((y, e))
}
