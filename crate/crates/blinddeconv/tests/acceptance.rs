//! Acceptance suite: one PASS/FAIL line per criterion. Every tolerance,
//! grid and seed is fixed below.

use std::time::Instant;

use blinddeconv::config::{linear_grid, Algo, AlgoChoice, ExperimentConfig, ExperimentKind, Settings};
use blinddeconv::experiments::{self, error_curve, loglog_slope, min_l_reaching, success_curve, CellStats};
use blinddeconv::record::TrialRecord;
use blinddeconv::trial::{self, TrialOutcome};
use blinddeconv_core::ensembles::{AKind, SubspaceOperators};
use blinddeconv_core::init::power_method;
use blinddeconv_core::lifted::{outer, DenseLifted, LiftedOperator, Truth};
use blinddeconv_core::numeric::{cvec, DenseMatrix, RngStream};
use blinddeconv_core::objective::{evaluate, grad_f, loss_f, objective_value, Iterate, RegParams};
use blinddeconv_core::C64;
use nalgebra::DMatrix;

const SEED: u64 = 20_240_601;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn rel(a: &[C64], b: &[C64]) -> f64 {
    cvec::norm(&cvec::sub(a, b)) / cvec::norm(b).max(1e-300)
}

fn rel_scalar(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn instance(l: usize, k: usize, n: usize, kind: AKind, rng: &mut RngStream) -> (LiftedOperator, Truth, Vec<C64>) {
    let ops = SubspaceOperators::generate(l, k, n, kind, rng).unwrap();
    let truth = Truth::new(rng.complex_gaussian_vec(k), rng.complex_gaussian_vec(n), &ops).unwrap();
    let lifted = LiftedOperator::new(ops);
    let y0 = lifted.forward_rank1(&truth.h0, &truth.x0).unwrap();
    (lifted, truth, y0)
}

fn random_matrix(k: usize, n: usize, rng: &mut RngStream) -> DenseMatrix {
    DenseMatrix::from_fn(k, n, |_, _| rng.complex_gaussian())
}

/// Frobenius inner product `tr(Z^* W)`.
fn frob_dot(z: &DenseMatrix, w: &DenseMatrix) -> C64 {
    cvec::dot(z.as_slice(), w.as_slice())
}

fn criterion_1() -> Verdict {
    const TOL: f64 = 1e-10;
    let mut rng = RngStream::new(SEED, 1);
    let mut worst: f64 = 0.0;
    for (k, n, l) in [(3, 2, 8), (4, 4, 16)] {
        for kind in [AKind::Gaussian, AKind::Hadamard] {
            let (lifted, _, _) = instance(l, k, n, kind, &mut rng);
            let dense = DenseLifted::new(lifted.ops()).unwrap();
            for _ in 0..10 {
                let h = rng.complex_gaussian_vec(k);
                let x = rng.complex_gaussian_vec(n);
                let z = rng.complex_gaussian_vec(l);
                let y = rng.complex_gaussian_vec(l);
                worst = worst.max(rel(&lifted.forward_rank1(&h, &x).unwrap(), &dense.apply(&outer(&h, &x))));
                let adj = dense.adjoint(&z);
                worst = worst.max(rel(&lifted.adjoint_apply_right(&z, &x).unwrap(), &adj.matvec(&x)));
                worst = worst.max(rel(&lifted.adjoint_apply_left(&z, &h).unwrap(), &adj.adjoint_matvec(&h)));
                let it = Iterate::new(h.clone(), x.clone(), lifted.ops()).unwrap();
                let r_dense = cvec::sub(&dense.apply(&outer(&h, &x)), &y);
                worst = worst.max(rel_scalar(loss_f(&it, &y).unwrap(), cvec::norm_sqr(&r_dense)));
                let (gh, gx) = grad_f(&it, &y, lifted.ops()).unwrap();
                let ar = dense.adjoint(&r_dense);
                worst = worst.max(rel(&gh, &ar.matvec(&x)));
                worst = worst.max(rel(&gx, &ar.adjoint_matvec(&h)));
            }
        }
    }
    let mut worst_adj: f64 = 0.0;
    for t in 0..100 {
        let (k, n, l) = if t % 2 == 0 { (3, 2, 8) } else { (4, 4, 16) };
        let kind = if t % 4 < 2 { AKind::Gaussian } else { AKind::Hadamard };
        let (lifted, _, _) = instance(l, k, n, kind, &mut rng);
        let dense = DenseLifted::new(lifted.ops()).unwrap();
        let z = random_matrix(k, n, &mut rng);
        let w = rng.complex_gaussian_vec(l);
        let lhs = cvec::dot(&dense.apply(&z), &w);
        let rhs = frob_dot(&z, &dense.adjoint(&w));
        worst_adj = worst_adj.max((lhs - rhs).norm() / lhs.norm().max(1e-300));
        // matrix-free rank-one form
        let h = rng.complex_gaussian_vec(k);
        let x = rng.complex_gaussian_vec(n);
        let lhs = cvec::dot(&lifted.forward_rank1(&h, &x).unwrap(), &w);
        let rhs = cvec::dot(&h, &lifted.adjoint_apply_right(&w, &x).unwrap());
        worst_adj = worst_adj.max((lhs - rhs).norm() / lhs.norm().max(1e-300));
    }
    verdict(
        worst < TOL && worst_adj < TOL,
        format!("max rel. deviation from dense oracle {worst:.2e}, adjoint identity {worst_adj:.2e} (tol {TOL:e})"),
    )
}

fn criterion_2() -> Verdict {
    const STEP: f64 = 1e-5;
    const TOL: f64 = 1e-5;
    let mut rng = RngStream::new(SEED, 2);
    let (l, k, n) = (64, 8, 6);
    let (lifted, truth, y0) = instance(l, k, n, AKind::Gaussian, &mut rng);
    let y: Vec<C64> = y0.iter().zip(rng.complex_gaussian_vec(l)).map(|(a, e)| a + e * 0.1).collect();
    // small d and mu^2 so that all three penalty terms are active somewhere
    let p = RegParams::new(0.7, 0.3 * truth.d0, 0.8, 1.0 / 15.0).unwrap();
    let mut worst: f64 = 0.0;
    let mut active = 0;
    for _ in 0..20 {
        let scale = 0.5 + rng.uniform();
        let h = cvec::scale(&rng.complex_gaussian_vec(k), C64::new(scale, 0.0));
        let x = rng.complex_gaussian_vec(n);
        let it = Iterate::new(h.clone(), x.clone(), lifted.ops()).unwrap();
        let ev = evaluate(&it, &y, Some(&p), lifted.ops()).unwrap();
        if ev.g > 0.0 {
            active += 1;
        }
        for _ in 0..5 {
            let dh = rng.complex_gaussian_vec(k);
            let dx = rng.complex_gaussian_vec(n);
            let at = |t: f64| {
                let hh: Vec<C64> = h.iter().zip(&dh).map(|(a, d)| a + d * t).collect();
                let xx: Vec<C64> = x.iter().zip(&dx).map(|(a, d)| a + d * t).collect();
                let it = Iterate::new(hh, xx, lifted.ops()).unwrap();
                let (f, g) = objective_value(&it, &y, Some(&p)).unwrap();
                f + g
            };
            let fd = (at(STEP) - at(-STEP)) / (2.0 * STEP);
            let an = 2.0 * (cvec::dot(&ev.gh, &dh) + cvec::dot(&ev.gx, &dx)).re;
            worst = worst.max(rel_scalar(fd, an));
        }
    }
    verdict(
        worst < TOL,
        format!("max rel. FD mismatch {worst:.2e} over 100 checks, penalty active at {active}/20 points (tol {TOL:e})"),
    )
}

fn criterion_3() -> Verdict {
    let (k, n, l, trials) = (20, 20, 400, 20);
    let mut inside = 0;
    let mut ratios = Vec::new();
    for t in 0..trials {
        let mut rng = RngStream::new(SEED, 300 + t);
        let (lifted, truth, y) = instance(l, k, n, AKind::Gaussian, &mut rng);
        let pm = power_method(&y, &lifted, 50, &mut rng).unwrap();
        let r = pm.d / truth.d0;
        ratios.push(r);
        if (0.9..=1.1).contains(&r) {
            inside += 1;
        }
    }
    let frac = inside as f64 / trials as f64;
    // power method against a dense SVD at (4, 3, 64)
    let mut rng = RngStream::new(SEED, 399);
    let (lifted, _, y) = instance(64, 4, 3, AKind::Gaussian, &mut rng);
    let pm = power_method(&y, &lifted, 200, &mut rng).unwrap();
    let m = DenseLifted::new(lifted.ops()).unwrap().adjoint(&y);
    let s_max = dense_top_singular_value(&m);
    let svd_err = rel_scalar(pm.d, s_max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = ratios.iter().copied().fold(0.0, f64::max);
    verdict(
        frac >= 0.95 && svd_err < 1e-8,
        format!(
            "d/d0 in [0.9, 1.1] for {inside}/{trials} trials (need >= 95%), range [{lo:.3}, {hi:.3}]; power vs dense SVD rel. err {svd_err:.2e} (tol 1e-8)"
        ),
    )
}

/// Largest singular value via nalgebra's dense SVD.
fn dense_top_singular_value(m: &DenseMatrix) -> f64 {
    DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j))
        .singular_values()
        .max()
}

struct GridRun {
    cfg: ExperimentConfig,
    records: Vec<TrialRecord>,
    stats: Vec<CellStats>,
    trials_checked: usize,
    monotone_violations: usize,
}

fn run_grid(kind: ExperimentKind, s: Settings) -> GridRun {
    let cfg = ExperimentConfig::resolve(kind, &s).unwrap();
    let cells = experiments::cells(&cfg);
    let per_trial = experiments::execute(&cfg, &cells, |cell, out: TrialOutcome| {
        let bad = out
            .outcomes
            .iter()
            .filter(|o| o.trace.records.windows(2).any(|w| w[1].ftilde > w[0].ftilde))
            .count();
        (trial::records(cell, &out), out.outcomes.len(), bad)
    })
    .unwrap();
    let mut records = Vec::new();
    let (mut checked, mut bad) = (0, 0);
    for (r, c, b) in per_trial {
        records.extend(r);
        checked += c;
        bad += b;
    }
    let stats = experiments::summarize(&cfg, &cells, &records);
    GridRun {
        cfg,
        records,
        stats,
        trials_checked: checked,
        monotone_violations: bad,
    }
}

fn phase_transition() -> GridRun {
    run_grid(
        ExperimentKind::PhaseTransition,
        Settings {
            seed: Some(SEED),
            trials: Some(50),
            k: Some(50),
            n: Some(50),
            l: Some(linear_grid(100, 400, 16)),
            a_kind: Some(AKind::Gaussian),
            algo: Some(AlgoChoice::RegGrad),
            timing: Some(false),
            ..Settings::default()
        },
    )
}

fn criterion_4(pt: &GridRun) -> Verdict {
    let curve = success_curve(&pt.stats, Algo::RegGrad, None);
    let at = |l: usize| curve.iter().find(|c| c.0 == l).map(|c| c.1).unwrap();
    let (hi, lo) = (at(400), at(100));
    verdict(
        hi >= 0.9 && lo <= 0.2,
        format!("success at L = 400: {hi:.2} (need >= 0.90); at L = 100: {lo:.2} (need <= 0.20)"),
    )
}

fn criterion_5(pt: &GridRun) -> Verdict {
    let curve = success_curve(&pt.stats, Algo::RegGrad, None);
    let worst_drop = curve
        .windows(2)
        .map(|w| w[0].1 - w[1].1)
        .fold(f64::NEG_INFINITY, f64::max);
    let text: Vec<String> = curve.iter().map(|(l, f)| format!("{l}:{f:.2}")).collect();
    verdict(
        worst_drop <= 0.1,
        format!("largest drop between adjacent L {worst_drop:.2} (slack 0.10); curve {}", text.join(" ")),
    )
}

fn noise_sweep() -> GridRun {
    run_grid(
        ExperimentKind::NoiseSweep,
        Settings {
            seed: Some(SEED),
            trials: Some(20),
            k: Some(50),
            n: Some(50),
            l: Some(vec![512, 1024]),
            a_kind: Some(AKind::Gaussian),
            timing: Some(false),
            ..Settings::default()
        },
    )
}

fn criterion_6(ns: &GridRun) -> Verdict {
    let c512 = error_curve(&ns.stats, Algo::RegGrad, 512);
    let c1024 = error_curve(&ns.stats, Algo::RegGrad, 1024);
    let s512 = loglog_slope(&c512);
    let s1024 = loglog_slope(&c1024);
    let below = c512.iter().zip(&c1024).filter(|(a, b)| b.1 < a.1).count();
    let slopes_ok = (s512 - 1.0).abs() <= 0.15 && (s1024 - 1.0).abs() <= 0.15;
    verdict(
        slopes_ok && below == c512.len() && c512.len() == 9,
        format!(
            "log-log slope {s512:.3} (L = 512), {s1024:.3} (L = 1024), need 1 +- 0.15; L = 1024 below L = 512 at {below}/{} noise levels",
            c512.len()
        ),
    )
}

fn criterion_7(runs: &[&GridRun]) -> Verdict {
    let checked: usize = runs.iter().map(|r| r.trials_checked).sum();
    let bad: usize = runs.iter().map(|r| r.monotone_violations).sum();
    verdict(
        bad == 0 && checked > 0,
        format!("{bad} of {checked} backtracking runs had an objective increase"),
    )
}

fn criterion_8() -> Verdict {
    let cfg = ExperimentConfig::resolve(
        ExperimentKind::RipCheck,
        &Settings {
            seed: Some(SEED),
            trials: Some(100),
            k: Some(20),
            n: Some(20),
            l: Some(vec![2048]),
            a_kind: Some(AKind::Gaussian),
            ..Settings::default()
        },
    )
    .unwrap();
    let out = experiments::run_rip_check(&cfg).unwrap();
    let inside = out.ratios.iter().filter(|r| (0.7..=1.3).contains(*r)).count();
    verdict(
        out.ratios.len() == 100 && inside == 100,
        format!(
            "{inside}/{} ratios in [0.7, 1.3], range [{:.4}, {:.4}]",
            out.ratios.len(),
            out.min(),
            out.max()
        ),
    )
}

fn incoherence_scan() -> GridRun {
    run_grid(
        ExperimentKind::IncoherenceScan,
        Settings {
            seed: Some(SEED),
            trials: Some(20),
            k: Some(50),
            n: Some(50),
            mu_h2: Some(vec![3, 9, 15]),
            l: Some(linear_grid(100, 400, 7)),
            a_kind: Some(AKind::Gaussian),
            algo: Some(AlgoChoice::RegGrad),
            timing: Some(false),
            ..Settings::default()
        },
    )
}

fn criterion_9(is: &GridRun) -> Verdict {
    let mins: Vec<Option<usize>> = [3, 9, 15]
        .iter()
        .map(|&m| min_l_reaching(&is.stats, Algo::RegGrad, Some(m), 0.5))
        .collect();
    let all_found = mins.iter().all(Option::is_some);
    let ordered = mins.windows(2).all(|w| w[0] <= w[1]);
    let text: Vec<String> = [3, 9, 15]
        .iter()
        .zip(&mins)
        .map(|(m, l)| format!("mu_h2={m}: {}", l.map_or("none".to_string(), |l| l.to_string())))
        .collect();
    verdict(
        all_found && ordered,
        format!("minimal L with >= 50% success: {}", text.join(", ")),
    )
}

fn criterion_10(runs: &[&GridRun]) -> Verdict {
    let mut checked = 0;
    let mut mismatched = 0;
    for run in runs {
        let per_cell = run.cfg.trials * run.cfg.algo.algos().len();
        let cells = run.records.len() / per_cell;
        for (cell, trial_index) in [(0, 0), (cells / 2, run.cfg.trials / 2), (cells - 1, run.cfg.trials - 1)] {
            let rows = experiments::rerun(&run.cfg, cell, trial_index).unwrap();
            for (j, row) in rows.iter().enumerate() {
                let original = &run.records[cell * per_cell + trial_index * rows.len() + j];
                checked += 1;
                if row.csv_row() != original.csv_row() {
                    mismatched += 1;
                }
            }
        }
    }
    verdict(
        mismatched == 0 && checked > 0,
        format!("{checked} re-run rows compared byte-for-byte, {mismatched} differ"),
    )
}

fn main() {
    let start = Instant::now();
    let mut results: Vec<(usize, &str, Verdict)> = Vec::new();
    let mut record = |id: usize, name: &'static str, v: Verdict| {
        println!(
            "criterion {id:>2} {:<4} {name}: {} [{:.1}s]",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail,
            start.elapsed().as_secs_f64()
        );
        results.push((id, name, v));
    };
    record(1, "dense oracle equivalence", criterion_1());
    record(2, "gradient finite differences", criterion_2());
    record(3, "spectral initialization", criterion_3());
    let pt = phase_transition();
    record(4, "noiseless recovery", criterion_4(&pt));
    record(5, "phase-transition monotonicity", criterion_5(&pt));
    let ns = noise_sweep();
    record(6, "noise robustness", criterion_6(&ns));
    let is = incoherence_scan();
    record(7, "monotone descent", criterion_7(&[&pt, &ns, &is]));
    record(8, "empirical local isometry", criterion_8());
    record(9, "incoherence scan", criterion_9(&is));
    record(10, "determinism", criterion_10(&[&pt, &ns, &is]));
    let failed: Vec<usize> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        results.len() - failed.len(),
        results.len()
    );
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
