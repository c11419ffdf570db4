//! Empirical probe of the local restricted isometry of the lifted map around
//! the ground truth.

use alloc::vec::Vec;

use super::{delta_metric, membership, Iterate, RegParams};
use crate::lifted::{LiftedOperator, Truth};
use crate::numeric::{cvec, RngStream};
use crate::{Error, Result, C64};

const MAX_CONSECUTIVE_REJECTIONS: usize = 1000;
const REJECTIONS_BEFORE_SHRINK: usize = 20;

/// `||A(h x^* - h0 x0^*)||^2 / ||h x^* - h0 x0^*||_F^2`.
pub fn rip_ratio(lifted: &LiftedOperator, truth: &Truth, h: &[C64], x: &[C64]) -> Result<f64> {
    let delta = delta_metric(h, x, truth)?;
    if delta == 0.0 {
        return Err(Error::ZeroVector("rank-one difference"));
    }
    let diff = cvec::sub(
        &lifted.forward_rank1(h, x)?,
        &lifted.forward_rank1(&truth.h0, &truth.x0)?,
    );
    let den = delta * delta * truth.d0 * truth.d0;
    Ok(cvec::norm_sqr(&diff) / den)
}

/// Draws `samples` points of `N_d0 ∩ N_mu ∩ N_eps` by perturbing the truth,
/// `h = h0 + s ||h0|| g_h`, `x = x0 + s ||x0|| g_x` with unit random
/// directions and `s` uniform on `(0, s_max]`, and returns the isometry
/// ratio at each accepted point.
///
/// `s_max` starts at `eps` (acceptance well above 10% for balanced truths)
/// and shrinks by 30% after every 20 consecutive rejections.
pub fn empirical_rip_ratio(
    truth: &Truth,
    lifted: &LiftedOperator,
    p: &RegParams,
    samples: usize,
    rng: &mut RngStream,
) -> Result<Vec<f64>> {
    if samples == 0 {
        return Err(Error::InvalidParameter("samples must be at least 1"));
    }
    let nh = cvec::norm(&truth.h0);
    let nx = cvec::norm(&truth.x0);
    let mut s_max = p.eps;
    let mut ratios = Vec::with_capacity(samples);
    let mut rejected = 0usize;
    while ratios.len() < samples {
        let s = s_max * (1.0 - rng.uniform());
        let gh = cvec::normalized(&rng.complex_gaussian_vec(truth.h0.len()), "direction")?;
        let gx = cvec::normalized(&rng.complex_gaussian_vec(truth.x0.len()), "direction")?;
        let mut h = truth.h0.clone();
        let mut x = truth.x0.clone();
        cvec::axpy(C64::new(s * nh, 0.0), &gh, &mut h);
        cvec::axpy(C64::new(s * nx, 0.0), &gx, &mut x);
        let it = Iterate::new(h, x, lifted.ops())?;
        let inside = membership(&it, p, truth)?.all() && delta_metric(it.h(), it.x(), truth)? > 0.0;
        if inside {
            rejected = 0;
            ratios.push(rip_ratio(lifted, truth, it.h(), it.x())?);
        } else {
            rejected += 1;
            if rejected >= MAX_CONSECUTIVE_REJECTIONS {
                return Err(Error::Sampling { attempts: rejected });
            }
            if rejected % REJECTIONS_BEFORE_SHRINK == 0 {
                s_max *= 0.7;
            }
        }
    }
    Ok(ratios)
}
