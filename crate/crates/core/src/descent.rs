//! Wirtinger gradient descent on `F + G` (or plain `F`) with a constant
//! stepsize or Armijo backtracking.

use alloc::vec::Vec;

use crate::ensembles::SubspaceOperators;
use crate::init::InitResult;
use crate::lifted::Truth;
use crate::numeric::cvec;
use crate::objective::{delta_metric, evaluate, objective_value, Evaluation, Iterate, RegParams};
use crate::{Error, Result, C64};

/// Armijo backtracking: try `eta_start * shrink^k` for `k = 0..=max_halvings`
/// and accept the first step with
/// `F~(z - eta grad) <= F~(z) - c1 eta ||grad||^2`.
///
/// The first search starts from `eta0` (`1/d` when unset); each later search
/// starts from `growth` times the previously accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Backtracking {
    pub eta0: Option<f64>,
    pub shrink: f64,
    pub c1: f64,
    pub max_halvings: usize,
    pub growth: f64,
}

impl Default for Backtracking {
    fn default() -> Self {
        Self {
            eta0: None,
            shrink: 0.5,
            c1: 0.5,
            max_halvings: 50,
            growth: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Constant(f64),
    Backtracking(Backtracking),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub step: StepRule,
    pub max_iters: usize,
    /// Absolute gradient-norm threshold; `None` means `1e-10 d^2`.
    pub tol_grad: Option<f64>,
    /// Relative change of `F~` over `plateau_window` iterations.
    pub tol_obj: f64,
    pub plateau_window: usize,
    /// Minimize `F + G` (regGrad) instead of plain `F` (Grad).
    pub regularized: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            step: StepRule::Backtracking(Backtracking::default()),
            max_iters: 5000,
            tol_grad: None,
            tol_obj: 1e-12,
            plateau_window: 10,
            regularized: true,
        }
    }
}

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        match self.step {
            StepRule::Constant(eta) if !(eta > 0.0 && eta.is_finite()) => {
                return Err(Error::InvalidParameter("constant stepsize must be positive"));
            }
            StepRule::Backtracking(b) => {
                if !(b.shrink > 0.0 && b.shrink < 1.0) {
                    return Err(Error::InvalidParameter("shrink factor must lie in (0, 1)"));
                }
                if !(b.c1 > 0.0 && b.c1 < 1.0) {
                    return Err(Error::InvalidParameter("Armijo constant must lie in (0, 1)"));
                }
                if !(b.growth >= 1.0 && b.growth.is_finite()) {
                    return Err(Error::InvalidParameter("growth factor must be >= 1"));
                }
                if matches!(b.eta0, Some(e) if !(e > 0.0 && e.is_finite())) {
                    return Err(Error::InvalidParameter("eta0 must be positive"));
                }
            }
            _ => {}
        }
        if matches!(self.tol_grad, Some(t) if !(t > 0.0)) || !(self.tol_obj > 0.0) {
            return Err(Error::InvalidParameter("tolerances must be positive"));
        }
        if self.plateau_window == 0 {
            return Err(Error::InvalidParameter("plateau window must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub iterate: Iterate,
    pub eta: f64,
    pub ftilde: f64,
    /// Backtracking found no acceptable step; `iterate` is the input point.
    pub stalled: bool,
}

/// One descent step from `it` given its evaluation `ev`.
fn step_from(
    it: &Iterate,
    ev: &Evaluation,
    y: &[C64],
    reg: Option<&RegParams>,
    rule: &StepRule,
    eta_start: f64,
    ops: &SubspaceOperators,
) -> Result<StepOutcome> {
    let candidate = |eta: f64| -> Result<Iterate> {
        Iterate::new(
            cvec::sub_scaled(it.h(), eta, &ev.gh),
            cvec::sub_scaled(it.x(), eta, &ev.gx),
            ops,
        )
    };
    match rule {
        StepRule::Constant(eta) => {
            let next = candidate(*eta)?;
            let (f, g) = objective_value(&next, y, reg)?;
            Ok(StepOutcome {
                iterate: next,
                eta: *eta,
                ftilde: f + g,
                stalled: false,
            })
        }
        StepRule::Backtracking(b) => {
            let f0 = ev.ftilde();
            let g2 = ev.grad_norm_sqr();
            let mut eta = eta_start;
            for _ in 0..=b.max_halvings {
                let next = candidate(eta)?;
                let (f, g) = objective_value(&next, y, reg)?;
                let ft = f + g;
                if ft.is_finite() && ft <= f0 - b.c1 * eta * g2 {
                    return Ok(StepOutcome {
                        iterate: next,
                        eta,
                        ftilde: ft,
                        stalled: false,
                    });
                }
                eta *= b.shrink;
            }
            Ok(StepOutcome {
                iterate: it.clone(),
                eta: 0.0,
                ftilde: f0,
                stalled: true,
            })
        }
    }
}

/// One gradient step on `F + G` (`reg = None`: plain `F`). Backtracking
/// starts its search at `eta_start`.
pub fn step(
    it: &Iterate,
    y: &[C64],
    reg: Option<&RegParams>,
    rule: &StepRule,
    eta_start: f64,
    ops: &SubspaceOperators,
) -> Result<StepOutcome> {
    let ev = evaluate(it, y, reg, ops)?;
    step_from(it, &ev, y, reg, rule, eta_start, ops)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterRecord {
    pub t: usize,
    pub ftilde: f64,
    pub f: f64,
    pub g: f64,
    pub grad_norm: f64,
    pub delta: Option<f64>,
    /// Step that produced this iterate (0 for the starting point).
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    ObjectivePlateau,
    MaxIterations,
    Stalled,
    NonFinite,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::GradientTolerance => "gradient-tolerance",
            Termination::ObjectivePlateau => "objective-plateau",
            Termination::MaxIterations => "max-iterations",
            Termination::Stalled => "stalled",
            Termination::NonFinite => "non-finite",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub records: Vec<IterRecord>,
    pub h: Vec<C64>,
    pub x: Vec<C64>,
    pub termination: Termination,
}

impl SolveTrace {
    /// Number of accepted steps.
    pub fn iterations(&self) -> usize {
        self.records.last().map_or(0, |r| r.t)
    }

    pub fn final_record(&self) -> Option<&IterRecord> {
        self.records.last()
    }

    pub fn aborted(&self) -> bool {
        self.termination == Termination::NonFinite
    }

    /// `delta_{t+1} / delta_t` for consecutive records with known error.
    pub fn contraction_factors(&self) -> Vec<f64> {
        self.records
            .windows(2)
            .filter_map(|w| match (w[0].delta, w[1].delta) {
                (Some(a), Some(b)) if a > 0.0 => Some(b / a),
                _ => None,
            })
            .collect()
    }
}

/// Gradient descent from the initializer. Stops when the gradient norm drops
/// below `tol_grad`, when `F~` changes by less than `tol_obj` (relative) over
/// `plateau_window` iterations, when backtracking stalls, or after
/// `max_iters` steps. A non-finite iterate aborts with
/// [`Termination::NonFinite`].
pub fn solve(
    y: &[C64],
    ops: &SubspaceOperators,
    p: &RegParams,
    opts: &SolveOptions,
    init: &InitResult,
    truth: Option<&Truth>,
) -> Result<SolveTrace> {
    opts.validate()?;
    let reg = opts.regularized.then_some(p);
    let tol_grad = opts.tol_grad.unwrap_or(1e-10 * p.d * p.d);
    let (mut eta_start, growth) = match opts.step {
        StepRule::Constant(eta) => (eta, 1.0),
        StepRule::Backtracking(b) => (b.eta0.unwrap_or(1.0 / p.d), b.growth),
    };

    let mut it = Iterate::new(init.u0.clone(), init.v0.clone(), ops)?;
    let mut ev = evaluate(&it, y, reg, ops)?;
    let mut records: Vec<IterRecord> = Vec::new();
    let mut last_eta = 0.0;
    let mut t = 0;
    let termination = loop {
        let finite = it.is_finite() && ev.ftilde().is_finite() && ev.grad_norm().is_finite();
        let delta = match truth {
            Some(tr) if finite => Some(delta_metric(it.h(), it.x(), tr)?),
            _ => None,
        };
        records.push(IterRecord {
            t,
            ftilde: ev.ftilde(),
            f: ev.f,
            g: ev.g,
            grad_norm: ev.grad_norm(),
            delta,
            eta: last_eta,
        });
        if !finite {
            break Termination::NonFinite;
        }
        if ev.grad_norm() < tol_grad {
            break Termination::GradientTolerance;
        }
        let w = opts.plateau_window;
        if t >= w {
            let old = records[t - w].ftilde;
            if (old - ev.ftilde()).abs() <= opts.tol_obj * old.abs() {
                break Termination::ObjectivePlateau;
            }
        }
        if t >= opts.max_iters {
            break Termination::MaxIterations;
        }
        let out = step_from(&it, &ev, y, reg, &opts.step, eta_start, ops)?;
        if out.stalled {
            break Termination::Stalled;
        }
        last_eta = out.eta;
        eta_start = out.eta * growth;
        it = out.iterate;
        ev = evaluate(&it, y, reg, ops)?;
        t += 1;
    };
    let (h, x) = it.into_parts();
    Ok(SolveTrace {
        records,
        h,
        x,
        termination,
    })
}

/// Default recovery threshold on the relative error.
pub const SUCCESS_THRESHOLD: f64 = 1e-2;

/// Final relative error `||h x^* - h0 x0^*||_F / ||h0 x0^*||_F < threshold`.
pub fn success(trace: &SolveTrace, truth: &Truth, threshold: f64) -> Result<bool> {
    Ok(meets_threshold(final_delta(trace, truth)?, threshold))
}

/// Strict: an error equal to the threshold is a failure.
pub fn meets_threshold(delta: f64, threshold: f64) -> bool {
    delta < threshold
}

pub fn final_delta(trace: &SolveTrace, truth: &Truth) -> Result<f64> {
    if trace.aborted() {
        return Ok(f64::INFINITY);
    }
    delta_metric(&trace.h, &trace.x, truth)
}

#[cfg(test)]
#[path = "descent_tests.rs"]
mod tests;
