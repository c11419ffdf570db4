//! Loss `F`, penalty `G`, their Wirtinger gradients and the diagnostics used
//! to judge an iterate (relative error, incoherence, neighborhood membership).
//!
//! All gradients are derivatives with respect to the conjugate variables,
//! `dF/d conj(h)` and `dF/d conj(x)`. For a real function `f` and a complex
//! direction `D`, `d/dt f(z + t D) = 2 Re(D^T conj(grad f))`.

mod rip;

use alloc::vec::Vec;

use crate::ensembles::{PartialDft, SubspaceOperators};
use crate::lifted::{hadamard_conj, Truth};
use crate::numeric::cvec;
use crate::{Error, Result, C64};

pub use rip::{empirical_rip_ratio, rip_ratio};

/// Largest neighborhood radius the convergence analysis allows.
pub const MAX_EPS: f64 = 1.0 / 15.0;

/// Parameters of the penalty `G` and of the neighborhood tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegParams {
    pub rho: f64,
    pub d: f64,
    pub mu2: f64,
    pub eps: f64,
}

impl RegParams {
    pub fn new(rho: f64, d: f64, mu2: f64, eps: f64) -> Result<Self> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::InvalidParameter("rho must be finite and >= 0"));
        }
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidParameter("d must be finite and > 0"));
        }
        if !(mu2 > 0.0 && mu2.is_finite()) {
            return Err(Error::InvalidParameter("mu^2 must be finite and > 0"));
        }
        if !(eps > 0.0 && eps <= MAX_EPS) {
            return Err(Error::InvalidParameter("eps must lie in (0, 1/15]"));
        }
        Ok(Self { rho, d, mu2, eps })
    }

    /// The experimental parameter rule: `rho = d^2 / 100` and
    /// `mu = 6 sqrt(L / (K + N)) / ln L`, with `eps = 1/15`.
    pub fn experiment_defaults(d: f64, l: usize, k: usize, n: usize) -> Result<Self> {
        let mu = 6.0 * libm::sqrt(l as f64 / (k + n) as f64) / libm::log(l as f64);
        Self::new(d * d / 100.0, d, mu * mu, MAX_EPS)
    }
}

/// A candidate pair `(h, x)` with cached `B h` and `A x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Iterate {
    h: Vec<C64>,
    x: Vec<C64>,
    bh: Vec<C64>,
    ax: Vec<C64>,
}

impl Iterate {
    pub fn new(h: Vec<C64>, x: Vec<C64>, ops: &SubspaceOperators) -> Result<Self> {
        cvec::check_len("h", &h, ops.k())?;
        cvec::check_len("x", &x, ops.n())?;
        let bh = ops.b.apply(&h);
        let ax = ops.a.apply(&x);
        Ok(Self { h, x, bh, ax })
    }

    pub fn h(&self) -> &[C64] {
        &self.h
    }

    pub fn x(&self) -> &[C64] {
        &self.x
    }

    pub fn bh(&self) -> &[C64] {
        &self.bh
    }

    pub fn ax(&self) -> &[C64] {
        &self.ax
    }

    pub fn into_parts(self) -> (Vec<C64>, Vec<C64>) {
        (self.h, self.x)
    }

    pub fn is_finite(&self) -> bool {
        cvec::is_finite(&self.h) && cvec::is_finite(&self.x)
    }

    fn check_obs(&self, y: &[C64]) -> Result<()> {
        cvec::check_len("y", y, self.bh.len())
    }
}

#[inline]
pub fn g0(z: f64) -> f64 {
    let t = (z - 1.0).max(0.0);
    t * t
}

#[inline]
pub fn g0_prime(z: f64) -> f64 {
    2.0 * (z - 1.0).max(0.0)
}

/// `(B h) .* conj(A x) - y`
pub fn residual(it: &Iterate, y: &[C64]) -> Result<Vec<C64>> {
    it.check_obs(y)?;
    let mut r = hadamard_conj(&it.bh, &it.ax);
    r.iter_mut().zip(y).for_each(|(ri, yi)| *ri -= yi);
    Ok(r)
}

/// `F(h, x) = ||(B h) .* conj(A x) - y||^2`
pub fn loss_f(it: &Iterate, y: &[C64]) -> Result<f64> {
    Ok(cvec::norm_sqr(&residual(it, y)?))
}

/// Argument of the `l`-th incoherence term, `L |b_l^* h|^2 / (8 d mu^2)`.
#[inline]
fn incoherence_arg(bh_l: C64, l: usize, p: &RegParams) -> f64 {
    l as f64 * bh_l.norm_sqr() / (8.0 * p.d * p.mu2)
}

/// `G(h, x) = rho [G0(|h|^2/2d) + G0(|x|^2/2d) + sum_l G0(L |b_l^* h|^2 / 8 d mu^2)]`
pub fn penalty_g(it: &Iterate, p: &RegParams) -> f64 {
    if p.rho == 0.0 {
        return 0.0;
    }
    let l = it.bh.len();
    let norms = g0(cvec::norm_sqr(&it.h) / (2.0 * p.d)) + g0(cvec::norm_sqr(&it.x) / (2.0 * p.d));
    let incoh: f64 = it.bh.iter().map(|&b| g0(incoherence_arg(b, l, p))).sum();
    p.rho * (norms + incoh)
}

/// `(dF/d conj(h), dF/d conj(x)) = (B^H (r .* A x), A^H (conj(r) .* B h))`.
pub fn grad_f(it: &Iterate, y: &[C64], ops: &SubspaceOperators) -> Result<(Vec<C64>, Vec<C64>)> {
    let r = residual(it, y)?;
    let wh: Vec<C64> = r.iter().zip(&it.ax).map(|(a, b)| a * b).collect();
    let wx: Vec<C64> = r.iter().zip(&it.bh).map(|(a, b)| a.conj() * b).collect();
    Ok((ops.b.adjoint(&wh), ops.a.adjoint(&wx)))
}

/// Gradient of `G`. The `b_l` sum is evaluated as `B^H (s .* B h)`.
pub fn grad_g(it: &Iterate, p: &RegParams, ops: &SubspaceOperators) -> (Vec<C64>, Vec<C64>) {
    let c = p.rho / (2.0 * p.d);
    let l = it.bh.len();
    let w: Vec<C64> = it
        .bh
        .iter()
        .map(|&b| b * g0_prime(incoherence_arg(b, l, p)))
        .collect();
    let mut gh = ops.b.adjoint(&w);
    let sum_scale = c * l as f64 / (4.0 * p.mu2);
    cvec::scale_real_in_place(&mut gh, sum_scale);
    let hs = c * g0_prime(cvec::norm_sqr(&it.h) / (2.0 * p.d));
    cvec::axpy(C64::new(hs, 0.0), &it.h, &mut gh);
    let xs = c * g0_prime(cvec::norm_sqr(&it.x) / (2.0 * p.d));
    let gx = cvec::scale(&it.x, C64::new(xs, 0.0));
    (gh, gx)
}

/// Objective values and gradient at one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub f: f64,
    pub g: f64,
    pub gh: Vec<C64>,
    pub gx: Vec<C64>,
}

impl Evaluation {
    pub fn ftilde(&self) -> f64 {
        self.f + self.g
    }

    pub fn grad_norm_sqr(&self) -> f64 {
        cvec::norm_sqr(&self.gh) + cvec::norm_sqr(&self.gx)
    }

    pub fn grad_norm(&self) -> f64 {
        libm::sqrt(self.grad_norm_sqr())
    }
}

/// `F + G` value and gradient with one `B^H` and one `A^H` application.
/// `reg = None` evaluates plain `F`.
pub fn evaluate(
    it: &Iterate,
    y: &[C64],
    reg: Option<&RegParams>,
    ops: &SubspaceOperators,
) -> Result<Evaluation> {
    let r = residual(it, y)?;
    let f = cvec::norm_sqr(&r);
    let mut wh: Vec<C64> = r.iter().zip(&it.ax).map(|(a, b)| a * b).collect();
    let wx: Vec<C64> = r.iter().zip(&it.bh).map(|(a, b)| a.conj() * b).collect();
    let (g, h_coef, x_coef) = match reg {
        Some(p) if p.rho > 0.0 => {
            let c = p.rho / (2.0 * p.d);
            let l = it.bh.len();
            let sum_scale = c * l as f64 / (4.0 * p.mu2);
            for (w, &b) in wh.iter_mut().zip(&it.bh) {
                let s = g0_prime(incoherence_arg(b, l, p));
                if s > 0.0 {
                    *w += b * (sum_scale * s);
                }
            }
            let zh = cvec::norm_sqr(&it.h) / (2.0 * p.d);
            let zx = cvec::norm_sqr(&it.x) / (2.0 * p.d);
            (penalty_g(it, p), c * g0_prime(zh), c * g0_prime(zx))
        }
        _ => (0.0, 0.0, 0.0),
    };
    let mut gh = ops.b.adjoint(&wh);
    let mut gx = ops.a.adjoint(&wx);
    if h_coef != 0.0 {
        cvec::axpy(C64::new(h_coef, 0.0), &it.h, &mut gh);
    }
    if x_coef != 0.0 {
        cvec::axpy(C64::new(x_coef, 0.0), &it.x, &mut gx);
    }
    Ok(Evaluation { f, g, gh, gx })
}

/// `F + G` without the gradient.
pub fn objective_value(it: &Iterate, y: &[C64], reg: Option<&RegParams>) -> Result<(f64, f64)> {
    let f = loss_f(it, y)?;
    let g = reg.map_or(0.0, |p| penalty_g(it, p));
    Ok((f, g))
}

/// Relative error `||h x^* - h0 x0^*||_F / d0` via the expanded inner
/// products.
pub fn delta_metric(h: &[C64], x: &[C64], truth: &Truth) -> Result<f64> {
    cvec::check_len("h", h, truth.h0.len())?;
    cvec::check_len("x", x, truth.x0.len())?;
    let d0 = truth.d0;
    let cross = cvec::dot(h, &truth.h0) * cvec::dot(&truth.x0, x);
    let radicand = cvec::norm_sqr(h) * cvec::norm_sqr(x) + d0 * d0 - 2.0 * cross.re;
    if radicand < 0.0 {
        if radicand > -1e-12 * d0 * d0 {
            return Ok(0.0);
        }
        return Err(Error::NegativeRadicand { value: radicand });
    }
    Ok(libm::sqrt(radicand) / d0)
}

/// `mu_h^2 = L ||B h||_inf^2 / ||h||^2`.
pub fn incoherence_mu2(h: &[C64], b: &PartialDft) -> Result<f64> {
    cvec::check_len("h", h, b.k())?;
    let nh = cvec::norm_sqr(h);
    if nh == 0.0 {
        return Err(Error::ZeroVector("incoherence"));
    }
    let peak = cvec::norm_inf(&b.apply(h));
    Ok(b.l() as f64 * peak * peak / nh)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Membership {
    pub in_nd0: bool,
    pub in_nmu: bool,
    pub in_neps: bool,
}

impl Membership {
    pub fn all(&self) -> bool {
        self.in_nd0 && self.in_nmu && self.in_neps
    }
}

/// Closed-set membership in `N_d0`, `N_mu` and `N_eps`.
pub fn membership(it: &Iterate, p: &RegParams, truth: &Truth) -> Result<Membership> {
    let r = 2.0 * libm::sqrt(truth.d0);
    let in_nd0 = cvec::norm(&it.h) <= r && cvec::norm(&it.x) <= r;
    let l = it.bh.len() as f64;
    let in_nmu = libm::sqrt(l) * cvec::norm_inf(&it.bh) <= 4.0 * libm::sqrt(truth.d0 * p.mu2);
    let in_neps = delta_metric(&it.h, &it.x, truth)? <= p.eps;
    Ok(Membership {
        in_nd0,
        in_nmu,
        in_neps,
    })
}

/// Per-iterate diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Metrics {
    pub delta: f64,
    pub f_val: f64,
    pub g_val: f64,
    pub ftilde_val: f64,
    pub grad_norm: f64,
    pub membership: Membership,
}

pub fn metrics(
    it: &Iterate,
    y: &[C64],
    p: &RegParams,
    ops: &SubspaceOperators,
    truth: &Truth,
) -> Result<Metrics> {
    let ev = evaluate(it, y, Some(p), ops)?;
    Ok(Metrics {
        delta: delta_metric(&it.h, &it.x, truth)?,
        f_val: ev.f,
        g_val: ev.g,
        ftilde_val: ev.ftilde(),
        grad_norm: ev.grad_norm(),
        membership: membership(it, p, truth)?,
    })
}
