//! One Monte Carlo trial: draw an instance, initialize, run each solver.

use std::time::Instant;

use blinddeconv_core::descent::{self, Backtracking, SolveOptions, SolveTrace, StepRule};
use blinddeconv_core::ensembles::{AKind, SubspaceOperators};
use blinddeconv_core::init::{initialize, InitOptions, InitResult};
use blinddeconv_core::lifted::{add_noise, LiftedOperator, NoiseMode, Truth};
use blinddeconv_core::numeric::rng::mix_seed;
use blinddeconv_core::numeric::RngStream;
use blinddeconv_core::objective::RegParams;
use blinddeconv_core::C64;

use crate::config::{kind_tag, Algo, ExperimentKind, SolverSettings};
use crate::error::AppResult;
use crate::record::TrialRecord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel {
    Gaussian,
    /// First `m` coordinates equal to one, the rest zero.
    Indicator(usize),
    /// Complex Gaussian taps with variance `exp(-k / decay)`.
    Multipath { decay: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Signal {
    Gaussian,
    Qpsk,
}

/// One grid cell; trials within a cell differ only in their RNG stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellSpec {
    pub kind: ExperimentKind,
    pub k: usize,
    pub n: usize,
    pub l: usize,
    pub a_kind: AKind,
    pub sigma: f64,
    pub channel: Channel,
    pub signal: Signal,
}

impl CellSpec {
    pub fn gaussian(kind: ExperimentKind, k: usize, n: usize, l: usize, a_kind: AKind) -> Self {
        Self {
            kind,
            k,
            n,
            l,
            a_kind,
            sigma: 0.0,
            channel: Channel::Gaussian,
            signal: Signal::Gaussian,
        }
    }

    /// Seed of this cell under `master`; trial `t` uses stream `t`.
    pub fn seed(&self, master: u64) -> u64 {
        let (ch, chp) = match self.channel {
            Channel::Gaussian => (0, 0),
            Channel::Indicator(m) => (1, m as u64),
            Channel::Multipath { decay } => (2, decay.to_bits()),
        };
        let sig = match self.signal {
            Signal::Gaussian => 0,
            Signal::Qpsk => 1,
        };
        let a = match self.a_kind {
            AKind::Gaussian => 0,
            AKind::Hadamard => 1,
        };
        mix_seed(&[
            master,
            kind_tag(self.kind),
            self.l as u64,
            self.k as u64,
            self.n as u64,
            a,
            ch,
            chp,
            sig,
            self.sigma.to_bits(),
        ])
    }

    /// Nominal incoherence label of the channel model.
    pub fn mu_label(&self) -> Option<usize> {
        match self.channel {
            Channel::Indicator(m) => Some(m),
            _ => None,
        }
    }
}

pub fn indicator_channel(k: usize, m: usize) -> Vec<C64> {
    (0..k)
        .map(|i| C64::new(if i < m { 1.0 } else { 0.0 }, 0.0))
        .collect()
}

pub fn multipath_channel(k: usize, decay: f64, rng: &mut RngStream) -> Vec<C64> {
    (0..k)
        .map(|i| rng.complex_gaussian() * (-(i as f64) / (2.0 * decay)).exp())
        .collect()
}

pub fn qpsk(n: usize, rng: &mut RngStream) -> Vec<C64> {
    const SYMBOLS: [C64; 4] = [
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
        C64::new(0.0, 1.0),
        C64::new(0.0, -1.0),
    ];
    (0..n).map(|_| SYMBOLS[rng.below(4)]).collect()
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub lifted: LiftedOperator,
    pub truth: Truth,
    pub y: Vec<C64>,
    pub noise: Vec<C64>,
}

/// Draws `h0`, `x0`, `A` and the noise, in that order.
pub fn draw_instance(cell: &CellSpec, rng: &mut RngStream) -> AppResult<Instance> {
    let h0 = match cell.channel {
        Channel::Gaussian => rng.complex_gaussian_vec(cell.k),
        Channel::Indicator(m) => indicator_channel(cell.k, m),
        Channel::Multipath { decay } => multipath_channel(cell.k, decay, rng),
    };
    let x0 = match cell.signal {
        Signal::Gaussian => rng.complex_gaussian_vec(cell.n),
        Signal::Qpsk => qpsk(cell.n, rng),
    };
    let ops = SubspaceOperators::generate(cell.l, cell.k, cell.n, cell.a_kind, rng)?;
    let truth = Truth::new(h0, x0, &ops)?;
    let lifted = LiftedOperator::new(ops);
    let y0 = lifted.forward_rank1(&truth.h0, &truth.x0)?;
    let (y, noise) = add_noise(&y0, cell.sigma, rng, NoiseMode::Relative)?;
    Ok(Instance {
        lifted,
        truth,
        y,
        noise,
    })
}

#[derive(Debug, Clone)]
pub struct AlgoOutcome {
    pub algo: Algo,
    pub trace: SolveTrace,
    pub rel_err: f64,
    pub success: bool,
    pub wall_s: f64,
}

#[derive(Debug, Clone)]
pub struct TrialOutcome {
    pub cell_seed: u64,
    pub trial: usize,
    pub instance: Instance,
    pub init: InitResult,
    pub params: RegParams,
    pub outcomes: Vec<AlgoOutcome>,
}

impl TrialOutcome {
    pub fn aborted(&self) -> bool {
        self.outcomes.iter().any(|o| o.trace.aborted())
    }
}

pub fn solve_options(solver: &SolverSettings, algo: Algo) -> SolveOptions {
    SolveOptions {
        step: match solver.eta {
            Some(eta) => StepRule::Constant(eta),
            None => StepRule::Backtracking(Backtracking::default()),
        },
        max_iters: solver.max_iters,
        regularized: algo.regularized(),
        ..SolveOptions::default()
    }
}

/// Runs every algorithm in `algos` on the same instance and the same
/// initial point.
pub fn run_trial(
    cell: &CellSpec,
    solver: &SolverSettings,
    algos: &[Algo],
    master: u64,
    trial: usize,
    timing: bool,
) -> AppResult<TrialOutcome> {
    let cell_seed = cell.seed(master);
    let mut rng = RngStream::new(cell_seed, trial as u64);
    let instance = draw_instance(cell, &mut rng)?;
    let clock = Instant::now();
    let mu2 = RegParams::experiment_defaults(1.0, cell.l, cell.k, cell.n)?.mu2;
    let init_opts = InitOptions {
        power_iters: solver.power_iters,
        skip_projection: solver.skip_projection,
        ..InitOptions::default()
    };
    let init = initialize(&instance.y, &instance.lifted, mu2, &init_opts, &mut rng)?;
    let params = RegParams::experiment_defaults(init.d, cell.l, cell.k, cell.n)?;
    let init_s = clock.elapsed().as_secs_f64();
    let mut outcomes = Vec::with_capacity(algos.len());
    for &algo in algos {
        let clock = Instant::now();
        let trace = descent::solve(
            &instance.y,
            instance.lifted.ops(),
            &params,
            &solve_options(solver, algo),
            &init,
            Some(&instance.truth),
        )?;
        let rel_err = descent::final_delta(&trace, &instance.truth)?;
        let wall_s = if timing {
            init_s + clock.elapsed().as_secs_f64()
        } else {
            0.0
        };
        outcomes.push(AlgoOutcome {
            algo,
            success: descent::meets_threshold(rel_err, solver.threshold),
            rel_err,
            trace,
            wall_s,
        });
    }
    Ok(TrialOutcome {
        cell_seed,
        trial,
        instance,
        init,
        params,
        outcomes,
    })
}

pub fn records(cell: &CellSpec, out: &TrialOutcome) -> Vec<TrialRecord> {
    out.outcomes
        .iter()
        .map(|o| TrialRecord {
            kind: cell.kind,
            seed: out.cell_seed,
            trial: out.trial,
            k: cell.k,
            n: cell.n,
            l: cell.l,
            mu_h2: out.instance.truth.mu_h2,
            sigma: cell.sigma,
            algo: o.algo,
            rel_err: o.rel_err,
            success: o.success,
            iters: o.trace.iterations(),
            wall_s: o.wall_s,
        })
        .collect()
}
