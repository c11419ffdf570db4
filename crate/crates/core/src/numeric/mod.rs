//! Complex vector arithmetic, unitary transforms and reproducible sampling.

pub mod cvec;
pub mod dense;
pub mod fft;
pub mod fwht;
pub mod rng;

pub use dense::DenseMatrix;
pub use fft::{fft_unitary, Direction, FftPlan};
pub use fwht::{fwht_in_place, fwht_unitary};
pub use rng::{sample_complex_gaussian, RngStream};

pub(crate) fn check_pow2(len: usize) -> crate::Result<()> {
    if len == 0 || !len.is_power_of_two() {
        return Err(crate::Error::NotPowerOfTwo { len });
    }
    Ok(())
}
