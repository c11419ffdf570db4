use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::*;
use crate::ensembles::{make_partial_dft_b, AKind, SubspaceOperators};
use crate::lifted::{LiftedOperator, Truth};
use crate::numeric::DenseMatrix;

fn instance(l: usize, k: usize, n: usize, kind: AKind, seed: u64) -> (LiftedOperator, Truth, Vec<C64>, RngStream) {
    let mut rng = RngStream::new(seed, 0);
    let ops = SubspaceOperators::generate(l, k, n, kind, &mut rng).unwrap();
    let lifted = LiftedOperator::new(ops);
    let truth = Truth::new(rng.complex_gaussian_vec(k), rng.complex_gaussian_vec(n), lifted.ops()).unwrap();
    let y = lifted.forward_rank1(&truth.h0, &truth.x0).unwrap();
    (lifted, truth, y, rng)
}

/// Leading singular triple of the materialized `A^*(y)` via nalgebra's SVD.
fn dense_svd(lifted: &LiftedOperator, y: &[C64]) -> (f64, Vec<C64>, Vec<C64>) {
    let m: DenseMatrix = lifted.dense_lifted_matrix().unwrap().adjoint(y);
    let na = DMatrix::from_fn(m.rows(), m.cols(), |i, j| m.get(i, j));
    let svd = na.svd(true, true);
    let (idx, &s) = svd
        .singular_values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();
    let u = svd.u.unwrap().column(idx).iter().copied().collect();
    let v = svd.v_t.unwrap().row(idx).iter().map(|z| z.conj()).collect();
    (s, u, v)
}

fn alignment(a: &[C64], b: &[C64]) -> f64 {
    cvec::dot(a, b).norm() / (cvec::norm(a) * cvec::norm(b))
}

#[test]
fn power_method_aligns_with_dense_svd() {
    let (lifted, _, y, mut rng) = instance(256, 4, 4, AKind::Gaussian, 1);
    let pm = power_method(&y, &lifted, 200, &mut rng).unwrap();
    let (_, u, v) = dense_svd(&lifted, &y);
    assert!(alignment(&pm.h_hat, &u) > 1.0 - 1e-6);
    assert!(alignment(&pm.x_hat, &v) > 1.0 - 1e-6);
}

#[test]
fn power_method_singular_value_matches_dense_svd() {
    let (lifted, _, y, mut rng) = instance(64, 4, 3, AKind::Gaussian, 2);
    let pm = power_method(&y, &lifted, 200, &mut rng).unwrap();
    let (s, _, _) = dense_svd(&lifted, &y);
    assert!((pm.d - s).abs() / s < 1e-8, "{} vs {}", pm.d, s);
    assert!((cvec::norm(&pm.h_hat) - 1.0).abs() < 1e-12);
}

#[test]
fn power_method_history_is_monotone() {
    let (lifted, _, y, mut rng) = instance(128, 8, 6, AKind::Hadamard, 3);
    let pm = power_method(&y, &lifted, 60, &mut rng).unwrap();
    for w in pm.history.windows(2) {
        assert!(w[1] >= w[0] - 1e-12 * w[0]);
    }
}

#[test]
fn power_method_scales_with_y() {
    let (lifted, _, y, _) = instance(64, 5, 4, AKind::Gaussian, 4);
    let y3 = cvec::scale(&y, C64::new(3.0, 0.0));
    let a = power_method(&y, &lifted, 100, &mut RngStream::new(5, 5)).unwrap();
    let b = power_method(&y3, &lifted, 100, &mut RngStream::new(5, 5)).unwrap();
    assert!((b.d - 3.0 * a.d).abs() < 1e-10 * b.d);
    assert!(alignment(&a.h_hat, &b.h_hat) > 1.0 - 1e-10);
    assert!(alignment(&a.x_hat, &b.x_hat) > 1.0 - 1e-10);
}

#[test]
fn power_method_rejects_zero_data() {
    let (lifted, _, y, mut rng) = instance(32, 3, 3, AKind::Gaussian, 6);
    let zero = alloc::vec![C64::new(0.0, 0.0); y.len()];
    assert!(matches!(
        power_method(&zero, &lifted, 10, &mut rng),
        Err(Error::ZeroVector(_))
    ));
}

/// ADMM on `min ||z - z0||^2 s.t. w = B z, sqrt(L)|w_l| <= bound`, with a
/// dense `B`. Independent of the Dykstra sweep.
fn admm_projection(z0: &[C64], bound: f64, b: &DenseMatrix, iters: usize) -> Vec<C64> {
    let l = b.rows();
    let radius = bound / (l as f64).sqrt();
    let rho = 1.0;
    let mut w = b.matvec(z0);
    let mut u = alloc::vec![C64::new(0.0, 0.0); l];
    let mut z = z0.to_vec();
    for _ in 0..iters {
        // (I + rho B^H B) z = z0 + rho B^H (w - u), with B^H B = I
        let t: Vec<C64> = w.iter().zip(&u).map(|(a, b)| a - b).collect();
        let bt = b.adjoint_matvec(&t);
        z = z0.iter().zip(&bt).map(|(a, b)| (a + b * rho) / (1.0 + rho)).collect();
        let bz = b.matvec(&z);
        w = bz.iter().zip(&u).map(|(a, b)| clip(a + b, radius)).collect();
        for ((ui, bzi), wi) in u.iter_mut().zip(&bz).zip(&w) {
            *ui += bzi - wi;
        }
    }
    z
}

fn peak(b: &PartialDft, z: &[C64]) -> f64 {
    (b.l() as f64).sqrt() * cvec::norm_inf(&b.apply(z))
}

#[test]
fn feasible_point_is_unchanged() {
    let b = make_partial_dft_b(64, 8).unwrap();
    let z0 = RngStream::new(7, 0).complex_gaussian_vec(8);
    let bound = 2.0 * peak(&b, &z0);
    let p = project_incoherence(&z0, bound, &b, 1e-9, 500).unwrap();
    assert!(p.converged);
    assert!(cvec::norm(&cvec::sub(&p.z, &z0)) < 1e-12 * cvec::norm(&z0));
}

#[test]
fn square_case_is_a_single_clip() {
    let b = make_partial_dft_b(16, 16).unwrap();
    let z0 = RngStream::new(8, 0).complex_gaussian_vec(16);
    let bound = 0.5 * peak(&b, &z0);
    let p = project_incoherence(&z0, bound, &b, 1e-9, 500).unwrap();
    let radius = bound / 4.0;
    let clipped: Vec<C64> = b.apply(&z0).into_iter().map(|w| clip(w, radius)).collect();
    let expect = b.adjoint(&clipped);
    assert!(cvec::norm(&cvec::sub(&p.z, &expect)) < 1e-12 * cvec::norm(&expect));
    assert!(p.sweeps <= 2);
}

#[test]
fn projection_matches_admm_oracle() {
    let b = make_partial_dft_b(8, 4).unwrap();
    let dense = b.materialize();
    let mut rng = RngStream::new(9, 0);
    for _ in 0..5 {
        let z0 = rng.complex_gaussian_vec(4);
        let bound = 0.6 * peak(&b, &z0);
        let p = project_incoherence(&z0, bound, &b, 1e-12, 100_000).unwrap();
        let oracle = admm_projection(&z0, bound, &dense, 200_000);
        let err = cvec::norm(&cvec::sub(&p.z, &oracle));
        assert!(err < 1e-6, "projection differs from oracle by {err:e}");
    }
}

#[test]
fn projection_properties() {
    let b = make_partial_dft_b(128, 16).unwrap();
    let mut rng = RngStream::new(10, 0);
    for _ in 0..10 {
        let z1 = rng.complex_gaussian_vec(16);
        let z2 = rng.complex_gaussian_vec(16);
        let bound = 0.5 * peak(&b, &z1);
        let p1 = project_incoherence(&z1, bound, &b, 1e-9, 500).unwrap();
        let p2 = project_incoherence(&z2, bound, &b, 1e-9, 500).unwrap();
        // feasible
        assert!(peak(&b, &p1.z) <= bound * (1.0 + 1e-9));
        // idempotent
        let again = project_incoherence(&p1.z, bound, &b, 1e-9, 500).unwrap();
        assert!(cvec::norm(&cvec::sub(&again.z, &p1.z)) < 1e-9 * cvec::norm(&p1.z));
        // non-expansive (up to the stopping tolerance)
        let lhs = cvec::norm(&cvec::sub(&p1.z, &p2.z));
        let rhs = cvec::norm(&cvec::sub(&z1, &z2));
        assert!(lhs <= rhs + 1e-6 * rhs, "{lhs} > {rhs}");
    }
}

#[test]
fn projection_rejects_bad_bound() {
    let b = make_partial_dft_b(16, 4).unwrap();
    assert!(project_incoherence(&[C64::new(1.0, 0.0); 4], 0.0, &b, 1e-9, 10).is_err());
}

#[test]
fn skipping_projection_returns_scaled_singular_vectors() {
    let (lifted, _, y, _) = instance(128, 6, 6, AKind::Gaussian, 11);
    let opts = InitOptions {
        skip_projection: true,
        ..InitOptions::default()
    };
    let init = initialize(&y, &lifted, 1.0, &opts, &mut RngStream::new(1, 2)).unwrap();
    let pm = power_method(&y, &lifted, 50, &mut RngStream::new(1, 2)).unwrap();
    let s = pm.d.sqrt();
    assert_eq!(init.u0, cvec::scale(&pm.h_hat, C64::new(s, 0.0)));
    assert!(!init.projection_applied);
    assert!((cvec::norm(&init.v0) - s).abs() < 1e-10 * s);
}

#[test]
fn projected_init_is_incoherent() {
    let (lifted, _, y, _) = instance(256, 10, 10, AKind::Gaussian, 12);
    let mu2 = 1.5;
    let init = initialize(&y, &lifted, mu2, &InitOptions::default(), &mut RngStream::new(3, 3)).unwrap();
    assert!(init.projection_applied);
    let bound = 2.0 * init.d.sqrt() * mu2.sqrt();
    assert!(peak(&lifted.ops().b, &init.u0) <= bound + 1e-9);
    assert!((cvec::norm(&init.v0) - init.d.sqrt()).abs() < 1e-10);
}
