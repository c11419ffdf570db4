//! Blind deconvolution under subspace models by regularized Wirtinger
//! gradient descent.
//!
//! The measurement model is `y = diag(B h) conj(A x) + e`, where `B` is the
//! first `K` columns of the unitary `L x L` DFT and `A` is an `L x N`
//! Gaussian or sign-randomized partial Hadamard matrix. The pair `(h, x)` is
//! recovered up to the scale ambiguity `(a h, x / conj(a))` by
//!
//! 1. a matrix-free power method on the lifted adjoint `A*(y)`, followed by a
//!    projection onto the incoherence set ([`init`]), and
//! 2. gradient descent on `F + G`, the least-squares loss plus a truncated
//!    quadratic penalty that keeps iterates bounded and incoherent
//!    ([`objective`], [`descent`]).
//!
//! The crate is `#![no_std]` and only needs `alloc`. Enable the `std`
//! feature to get `std::error::Error`-style integration in downstream code.

#![cfg_attr(not(any(test, feature = "std")), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod descent;
pub mod ensembles;
pub mod error;
pub mod init;
pub mod lifted;
pub mod numeric;
pub mod objective;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;
