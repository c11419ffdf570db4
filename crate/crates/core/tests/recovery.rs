use blinddeconv_core::descent::{final_delta, solve, SolveOptions, StepRule, Termination};
use blinddeconv_core::ensembles::{AKind, SubspaceOperators};
use blinddeconv_core::init::{initialize, InitOptions};
use blinddeconv_core::lifted::{add_noise, LiftedOperator, NoiseMode, Truth};
use blinddeconv_core::numeric::RngStream;
use blinddeconv_core::objective::RegParams;

struct Outcome {
    d_ratio: f64,
    delta: f64,
    termination: Termination,
}

fn run(l: usize, k: usize, n: usize, kind: AKind, sigma: f64, seed: u64, opts: &SolveOptions) -> Outcome {
    let mut rng = RngStream::new(seed, 0);
    let h0 = rng.complex_gaussian_vec(k);
    let x0 = rng.complex_gaussian_vec(n);
    let ops = SubspaceOperators::generate(l, k, n, kind, &mut rng).unwrap();
    let truth = Truth::new(h0, x0, &ops).unwrap();
    let lifted = LiftedOperator::new(ops);
    let y0 = lifted.forward_rank1(&truth.h0, &truth.x0).unwrap();
    let (y, _) = add_noise(&y0, sigma, &mut rng, NoiseMode::Relative).unwrap();
    let mu2 = RegParams::experiment_defaults(1.0, l, k, n).unwrap().mu2;
    let init = initialize(&y, &lifted, mu2, &InitOptions::default(), &mut rng).unwrap();
    let p = RegParams::experiment_defaults(init.d, l, k, n).unwrap();
    let trace = solve(&y, lifted.ops(), &p, opts, &init, Some(&truth)).unwrap();
    Outcome {
        d_ratio: init.d / truth.d0,
        delta: final_delta(&trace, &truth).unwrap(),
        termination: trace.termination,
    }
}

#[test]
fn recovers_with_both_ensembles() {
    for kind in [AKind::Gaussian, AKind::Hadamard] {
        let mut ok = 0;
        for seed in 0..10 {
            let o = run(512, 16, 16, kind, 0.0, seed, &SolveOptions::default());
            if o.delta < 1e-6 {
                ok += 1;
            }
        }
        assert!(ok >= 9, "{kind:?}: {ok}/10");
    }
}

#[test]
fn spectral_estimate_concentrates_with_oversampling() {
    let opts = SolveOptions {
        max_iters: 1,
        ..SolveOptions::default()
    };
    let spread = |l: usize| {
        (0..10)
            .map(|s| (run(l, 10, 10, AKind::Gaussian, 0.0, 100 + s, &opts).d_ratio - 1.0).abs())
            .sum::<f64>()
            / 10.0
    };
    let coarse = spread(128);
    let fine = spread(2048);
    assert!(fine < coarse, "{fine} vs {coarse}");
    assert!(fine < 0.15, "{fine}");
}

#[test]
fn noisy_error_tracks_noise_level() {
    let err = |sigma: f64| {
        (0..5)
            .map(|s| run(512, 16, 16, AKind::Gaussian, sigma, 200 + s, &SolveOptions::default()).delta)
            .sum::<f64>()
            / 5.0
    };
    let lo = err(1e-3);
    let hi = err(1e-2);
    let slope = (hi / lo).log10();
    assert!((0.8..1.2).contains(&slope), "slope {slope}");
}

#[test]
fn constant_step_also_converges() {
    let opts = SolveOptions {
        step: StepRule::Constant(0.2 / 16.0),
        max_iters: 3000,
        ..SolveOptions::default()
    };
    let o = run(512, 16, 16, AKind::Gaussian, 0.0, 3, &opts);
    assert!(o.delta < 1e-6, "{} {:?}", o.delta, o.termination);
}
