//! Spectral initialization: leading singular triple of `A^*(y)` by a
//! matrix-free power method, then projection of `sqrt(d) h_hat` onto the
//! incoherence set `{z : sqrt(L) ||B z||_inf <= 2 sqrt(d) mu}`.

use alloc::vec::Vec;

use crate::ensembles::PartialDft;
use crate::lifted::LiftedOperator;
use crate::numeric::{cvec, RngStream};
use crate::{Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct PowerResult {
    /// Leading singular value estimate `||A^*(y) x_hat||`.
    pub d: f64,
    pub h_hat: Vec<C64>,
    pub x_hat: Vec<C64>,
    /// `||A^*(y) v_t||` after every sweep; non-decreasing.
    pub history: Vec<f64>,
}

/// Alternating power iteration on `M = A^*(y)`:
/// `v <- M^H u / ||M^H u||`, `u <- M v / ||M v||`. The start vector `u` is
/// complex Gaussian from `rng`.
pub fn power_method(
    y: &[C64],
    lifted: &LiftedOperator,
    iters: usize,
    rng: &mut RngStream,
) -> Result<PowerResult> {
    if iters == 0 {
        return Err(Error::InvalidParameter("power method needs at least one iteration"));
    }
    cvec::check_len("y", y, lifted.l())?;
    if cvec::norm_sqr(y) == 0.0 {
        return Err(Error::ZeroVector("power method (y = 0)"));
    }
    let mut u = cvec::normalized(&rng.complex_gaussian_vec(lifted.k()), "start vector")?;
    let mut v = Vec::new();
    let mut history = Vec::with_capacity(iters);
    let mut d = 0.0;
    for _ in 0..iters {
        v = cvec::normalized(&lifted.adjoint_apply_left(y, &u)?, "power iterate")?;
        let mv = lifted.adjoint_apply_right(y, &v)?;
        d = cvec::norm(&mv);
        u = cvec::normalized(&mv, "power iterate")?;
        history.push(d);
    }
    Ok(PowerResult {
        d,
        h_hat: u,
        x_hat: v,
        history,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionResult {
    pub z: Vec<C64>,
    pub sweeps: usize,
    pub converged: bool,
}

/// Euclidean projection of `z0` onto `{z : sqrt(L) ||B z||_inf <= bound}`.
///
/// Since `B` is an isometry onto its range, this equals projecting `B z0`
/// onto the intersection of the box `{w : sqrt(L) |w_l| <= bound}` with
/// `range(B)`. Dykstra's method alternates the two closed-form projections
/// (pointwise clipping and `B B^H`); it stops once an iterate moves less
/// than `tol ||z0||`. The result is finally pulled radially into the set so
/// it is always feasible, even when the sweep budget runs out.
pub fn project_incoherence(
    z0: &[C64],
    bound: f64,
    b: &PartialDft,
    tol: f64,
    max_iters: usize,
) -> Result<ProjectionResult> {
    if !(bound > 0.0 && bound.is_finite()) {
        return Err(Error::InvalidParameter("projection bound must be positive"));
    }
    cvec::check_len("z0", z0, b.k())?;
    let l = b.l();
    let radius = bound / libm::sqrt(l as f64);
    let threshold = tol * cvec::norm(z0);

    let mut z = z0.to_vec();
    let mut x = b.apply(&z);
    let mut p = alloc::vec![C64::new(0.0, 0.0); l];
    let mut q = alloc::vec![C64::new(0.0, 0.0); l];
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < max_iters.max(1) {
        sweeps += 1;
        let mut yv = Vec::with_capacity(l);
        for (xi, pi) in x.iter().zip(p.iter_mut()) {
            let t = xi + *pi;
            let c = clip(t, radius);
            *pi = t - c;
            yv.push(c);
        }
        let t: Vec<C64> = yv.iter().zip(&q).map(|(a, b)| a + b).collect();
        let z_next = b.adjoint(&t);
        let x_next = b.apply(&z_next);
        for ((qi, ti), xi) in q.iter_mut().zip(&t).zip(&x_next) {
            *qi = ti - xi;
        }
        let change = cvec::norm(&cvec::sub(&z_next, &z));
        z = z_next;
        x = x_next;
        if change <= threshold {
            converged = true;
            break;
        }
    }
    let peak = libm::sqrt(l as f64) * cvec::norm_inf(&b.apply(&z));
    if peak > bound {
        cvec::scale_real_in_place(&mut z, bound / peak);
    }
    Ok(ProjectionResult {
        z,
        sweeps,
        converged,
    })
}

#[inline]
fn clip(w: C64, radius: f64) -> C64 {
    let m = w.norm();
    if m > radius {
        w * (radius / m)
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitOptions {
    pub power_iters: usize,
    pub skip_projection: bool,
    pub proj_tol: f64,
    pub proj_max_iters: usize,
}

impl Default for InitOptions {
    fn default() -> Self {
        Self {
            power_iters: 50,
            skip_projection: false,
            proj_tol: 1e-9,
            proj_max_iters: 500,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitResult {
    pub u0: Vec<C64>,
    pub v0: Vec<C64>,
    pub d: f64,
    pub power_iters: usize,
    pub projection_applied: bool,
    /// False when the projection hit its sweep budget.
    pub projection_converged: bool,
}

/// Runs the power method, sets `v0 = sqrt(d) x_hat` and
/// `u0 = P(sqrt(d) h_hat)` with bound `2 sqrt(d) mu` (or `sqrt(d) h_hat`
/// when the projection is skipped).
pub fn initialize(
    y: &[C64],
    lifted: &LiftedOperator,
    mu2: f64,
    opts: &InitOptions,
    rng: &mut RngStream,
) -> Result<InitResult> {
    let pm = power_method(y, lifted, opts.power_iters, rng)?;
    let s = libm::sqrt(pm.d);
    let v0 = cvec::scale(&pm.x_hat, C64::new(s, 0.0));
    let u_raw = cvec::scale(&pm.h_hat, C64::new(s, 0.0));
    let (u0, projection_converged) = if opts.skip_projection {
        (u_raw, true)
    } else {
        if !(mu2 > 0.0) {
            return Err(Error::InvalidParameter("mu^2 must be positive"));
        }
        let bound = 2.0 * s * libm::sqrt(mu2);
        let proj = project_incoherence(
            &u_raw,
            bound,
            &lifted.ops().b,
            opts.proj_tol,
            opts.proj_max_iters,
        )?;
        (proj.z, proj.converged)
    };
    Ok(InitResult {
        u0,
        v0,
        d: pm.d,
        power_iters: opts.power_iters,
        projection_applied: !opts.skip_projection,
        projection_converged,
    })
}

#[cfg(test)]
#[path = "init_tests.rs"]
mod tests;
