//! The subspace operators `B` (low-frequency partial DFT) and `A` (complex
//! Gaussian or sign-randomized partial Hadamard), with matrix-free actions.

use alloc::vec;
use alloc::vec::Vec;

use crate::numeric::fft::dft_entry;
use crate::numeric::fwht::hadamard_entry;
use crate::numeric::{check_pow2, fwht_in_place, Direction, DenseMatrix, FftPlan, RngStream};
use crate::{Error, Result, C64};

const ZERO: C64 = C64::new(0.0, 0.0);

/// The first `K` columns of the unitary `L x L` DFT.
///
/// Power-of-two lengths use an FFT; any other `L` falls back to a stored
/// dense `L x K` matrix.
#[derive(Debug, Clone)]
pub struct PartialDft {
    l: usize,
    k: usize,
    backend: DftBackend,
}

#[derive(Debug, Clone)]
enum DftBackend {
    Fft(FftPlan),
    Dense(DenseMatrix),
}

pub fn make_partial_dft_b(l: usize, k: usize) -> Result<PartialDft> {
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1"));
    }
    if k > l {
        return Err(Error::Dimension {
            what: "K must not exceed L",
            expected: l,
            got: k,
        });
    }
    let backend = if l.is_power_of_two() {
        DftBackend::Fft(FftPlan::new(l)?)
    } else {
        DftBackend::Dense(DenseMatrix::from_fn(l, k, |i, j| dft_entry(l, i, j)))
    };
    Ok(PartialDft { l, k, backend })
}

impl PartialDft {
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn is_fast(&self) -> bool {
        matches!(self.backend, DftBackend::Fft(_))
    }

    /// `B h`: DFT of `h` zero-padded to length `L`.
    pub fn apply(&self, h: &[C64]) -> Vec<C64> {
        debug_assert_eq!(h.len(), self.k);
        match &self.backend {
            DftBackend::Fft(plan) => {
                let mut buf = vec![ZERO; self.l];
                buf[..self.k].copy_from_slice(h);
                plan.process(&mut buf, Direction::Forward);
                buf
            }
            DftBackend::Dense(m) => m.matvec(h),
        }
    }

    /// `B^H w`: first `K` entries of the inverse DFT of `w`.
    pub fn adjoint(&self, w: &[C64]) -> Vec<C64> {
        debug_assert_eq!(w.len(), self.l);
        match &self.backend {
            DftBackend::Fft(plan) => {
                let mut buf = w.to_vec();
                plan.process(&mut buf, Direction::Inverse);
                buf.truncate(self.k);
                buf
            }
            DftBackend::Dense(m) => m.adjoint_matvec(w),
        }
    }

    /// Row `l` of `B`, i.e. `b_l^*`.
    pub fn row(&self, l: usize) -> Vec<C64> {
        (0..self.k).map(|j| dft_entry(self.l, l, j)).collect()
    }

    pub fn materialize(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.l, self.k, |i, j| dft_entry(self.l, i, j))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AKind {
    Gaussian,
    Hadamard,
}

impl AKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AKind::Gaussian => "gaussian",
            AKind::Hadamard => "hadamard",
        }
    }
}

/// The signal-subspace matrix `A` (`L x N`).
#[derive(Debug, Clone)]
pub enum MeasurementA {
    /// I.i.d. `CN(0, 1)` entries, stored densely.
    Gaussian(DenseMatrix),
    /// `A = D H[:, S]`: `D = diag(signs)`, `H` the +-1 Sylvester matrix and
    /// `S` the selected columns.
    Hadamard {
        l: usize,
        signs: Vec<f64>,
        columns: Vec<usize>,
    },
}

pub fn make_gaussian_a(l: usize, n: usize, rng: &mut RngStream) -> Result<MeasurementA> {
    if l == 0 || n == 0 {
        return Err(Error::InvalidParameter("L and N must be at least 1"));
    }
    let data = rng.complex_gaussian_vec(l * n);
    Ok(MeasurementA::Gaussian(DenseMatrix::from_row_major(l, n, data)))
}

pub fn make_partial_hadamard_a(l: usize, n: usize, rng: &mut RngStream) -> Result<MeasurementA> {
    check_pow2(l)?;
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1"));
    }
    if n > l {
        return Err(Error::Dimension {
            what: "N must not exceed L",
            expected: l,
            got: n,
        });
    }
    let columns = rng.choose_distinct(l, n);
    let signs = (0..l).map(|_| rng.sign()).collect();
    Ok(MeasurementA::Hadamard { l, signs, columns })
}

impl MeasurementA {
    pub fn kind(&self) -> AKind {
        match self {
            MeasurementA::Gaussian(_) => AKind::Gaussian,
            MeasurementA::Hadamard { .. } => AKind::Hadamard,
        }
    }

    pub fn l(&self) -> usize {
        match self {
            MeasurementA::Gaussian(m) => m.rows(),
            MeasurementA::Hadamard { l, .. } => *l,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            MeasurementA::Gaussian(m) => m.cols(),
            MeasurementA::Hadamard { columns, .. } => columns.len(),
        }
    }

    /// `A x`
    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        debug_assert_eq!(x.len(), self.n());
        match self {
            MeasurementA::Gaussian(m) => m.matvec(x),
            MeasurementA::Hadamard { l, signs, columns } => {
                let mut buf = vec![ZERO; *l];
                for (&c, &v) in columns.iter().zip(x) {
                    buf[c] = v;
                }
                fwht_in_place(&mut buf);
                for (b, s) in buf.iter_mut().zip(signs) {
                    *b *= *s;
                }
                buf
            }
        }
    }

    /// `A^H w`
    pub fn adjoint(&self, w: &[C64]) -> Vec<C64> {
        debug_assert_eq!(w.len(), self.l());
        match self {
            MeasurementA::Gaussian(m) => m.adjoint_matvec(w),
            MeasurementA::Hadamard { signs, columns, .. } => {
                // H is real symmetric, so A^H w = (H D w)[S]
                let mut buf: Vec<C64> = w.iter().zip(signs).map(|(v, s)| v * *s).collect();
                fwht_in_place(&mut buf);
                columns.iter().map(|&c| buf[c]).collect()
            }
        }
    }

    pub fn materialize(&self) -> DenseMatrix {
        match self {
            MeasurementA::Gaussian(m) => m.clone(),
            MeasurementA::Hadamard { l, signs, columns } => {
                DenseMatrix::from_fn(*l, columns.len(), |i, j| {
                    C64::new(signs[i] * hadamard_entry(i, columns[j]), 0.0)
                })
            }
        }
    }
}

/// The pair `(B, A)` defining one measurement model.
#[derive(Debug, Clone)]
pub struct SubspaceOperators {
    pub b: PartialDft,
    pub a: MeasurementA,
}

impl SubspaceOperators {
    pub fn new(b: PartialDft, a: MeasurementA) -> Result<Self> {
        if b.l() != a.l() {
            return Err(Error::Dimension {
                what: "A must have as many rows as B",
                expected: b.l(),
                got: a.l(),
            });
        }
        Ok(Self { b, a })
    }

    /// Builds `B` and an `A` of the requested kind, drawing `A` from `rng`.
    pub fn generate(l: usize, k: usize, n: usize, kind: AKind, rng: &mut RngStream) -> Result<Self> {
        let b = make_partial_dft_b(l, k)?;
        let a = match kind {
            AKind::Gaussian => make_gaussian_a(l, n, rng)?,
            AKind::Hadamard => make_partial_hadamard_a(l, n, rng)?,
        };
        Self::new(b, a)
    }

    pub fn l(&self) -> usize {
        self.b.l()
    }

    pub fn k(&self) -> usize {
        self.b.k()
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }
}
