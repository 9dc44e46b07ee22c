//! Cross-checks of the operator, distortion and solver paths against
//! explicit dense linear algebra.

mod common;

use common::*;
use netcomp_core::distortion::expected_distortion;
use netcomp_core::ensemble::DegradationEnsemble;
use netcomp_core::fft::Fft2d;
use netcomp_core::operators::{gaussian_kernel, BlurOperator, BoundaryMode};
use netcomp_core::signal::Signal;
use netcomp_core::solver::{iterative_z_update, z_update, ZUpdateContext};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rel_err(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt();
    let den: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    num / den.max(1e-300)
}

#[test]
fn apply_matches_dense_matrix_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for boundary in [BoundaryMode::Periodic, BoundaryMode::Symmetric] {
        for _ in 0..8 {
            let s = random_signal(&mut rng, 8, 8);
            let kernel = random_unit_kernel(&mut rng, 1);
            let op = BlurOperator::new(kernel.clone(), boundary);
            let out = op.apply(&s).unwrap();
            let dense = dense_operator_matrix(&kernel, boundary, 8, 8);
            let expected = dense.matvec(s.samples());
            assert!(rel_err(out.samples(), &expected) < 1e-12);
        }
    }
}

#[test]
fn adjoint_matches_dense_transpose_product() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for boundary in [BoundaryMode::Periodic, BoundaryMode::Symmetric] {
        for _ in 0..8 {
            let s = random_signal(&mut rng, 8, 8);
            let kernel = random_unit_kernel(&mut rng, 1);
            let op = BlurOperator::new(kernel.clone(), boundary);
            let out = op.apply_adjoint(&s).unwrap();
            let dense = dense_operator_matrix(&kernel, boundary, 8, 8).transpose();
            let expected = dense.matvec(s.samples());
            assert!(rel_err(out.samples(), &expected) < 1e-12);
        }
    }
}

#[test]
fn adjoint_inner_product_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for boundary in [BoundaryMode::Periodic, BoundaryMode::Symmetric] {
        for _ in 0..10 {
            let s1 = random_signal(&mut rng, 12, 10);
            let s2 = random_signal(&mut rng, 12, 10);
            let op = BlurOperator::new(random_unit_kernel(&mut rng, 2), boundary);
            let lhs = op.apply(&s1).unwrap().dot(&s2);
            let rhs = s1.dot(&op.apply_adjoint(&s2).unwrap());
            assert!(
                (lhs - rhs).abs() <= 1e-9 * lhs.abs().max(1.0),
                "{boundary:?}: <Hs1,s2>={lhs} vs <s1,H's2>={rhs}"
            );
        }
    }
}

#[test]
fn transfer_function_diagonalizes_apply() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for _ in 0..6 {
        let (w, h) = (16, 12);
        let s = random_signal(&mut rng, w, h);
        let op = BlurOperator::new(random_unit_kernel(&mut rng, 2), BoundaryMode::Periodic);
        let direct = op.apply(&s).unwrap();

        let tf = op.transfer_function(w, h).unwrap();
        let fft = Fft2d::new(w, h);
        let mut spectrum = fft.forward_real(s.samples());
        for (v, t) in spectrum.iter_mut().zip(&tf) {
            *v *= t;
        }
        let via_fft = fft.inverse_to_real(spectrum);
        assert!(rel_err(direct.samples(), &via_fft) < 1e-9);
    }
}

/// Circulant operators are normal: composing with the adjoint commutes
/// under periodic boundaries.
#[test]
fn periodic_operator_commutes_with_its_adjoint() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..8 {
        let s = random_signal(&mut rng, 12, 9);
        let op = BlurOperator::new(random_unit_kernel(&mut rng, 2), BoundaryMode::Periodic);
        let ata = op.apply_adjoint(&op.apply(&s).unwrap()).unwrap();
        let aat = op.apply(&op.apply_adjoint(&s).unwrap()).unwrap();
        assert!(rel_err(ata.samples(), aat.samples()) < 1e-12);
    }
}

#[test]
fn operator_linearity() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for boundary in [BoundaryMode::Periodic, BoundaryMode::Symmetric] {
        for _ in 0..6 {
            let s1 = random_signal(&mut rng, 10, 14);
            let s2 = random_signal(&mut rng, 10, 14);
            let (a, b) = (1.7, -0.4);
            let op = BlurOperator::new(random_unit_kernel(&mut rng, 2), boundary);
            let combined = op.apply(&s1.scale(a).add(&s2.scale(b))).unwrap();
            let separate = op
                .apply(&s1)
                .unwrap()
                .scale(a)
                .add(&op.apply(&s2).unwrap().scale(b));
            assert!(rel_err(combined.samples(), separate.samples()) < 1e-9);
        }
    }
}

fn random_dense_ensemble(
    rng: &mut ChaCha8Rng,
    k: usize,
    width: usize,
    height: usize,
) -> (DegradationEnsemble, Vec<(DenseMatrix, f64)>) {
    let probs = random_probabilities(rng, k);
    let mut pairs = Vec::new();
    let mut dense = Vec::new();
    for &p in &probs {
        let kernel = random_unit_kernel(rng, 1);
        dense.push((
            dense_operator_matrix(&kernel, BoundaryMode::Periodic, width, height),
            p,
        ));
        pairs.push((BlurOperator::new(kernel, BoundaryMode::Periodic), p));
    }
    (DegradationEnsemble::from_pairs(pairs).unwrap(), dense)
}

#[test]
fn expected_distortion_matches_dense_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for _ in 0..20 {
        let (w, h) = (8, 8);
        let x = random_signal(&mut rng, w, h);
        let v = random_signal(&mut rng, w, h);
        let (ensemble, dense) = random_dense_ensemble(&mut rng, 2, w, h);
        let fast = expected_distortion(&x, &v, &ensemble).unwrap();
        let oracle = dense_expected_distortion(x.samples(), v.samples(), &dense);
        assert!((fast - oracle).abs() <= 1e-9 * oracle.max(1e-12));
    }
}

#[test]
fn expected_distortion_is_convex_in_v() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let (w, h) = (8, 8);
        let x = random_signal(&mut rng, w, h);
        let v1 = random_signal(&mut rng, w, h);
        let v2 = random_signal(&mut rng, w, h);
        let (ensemble, _) = random_dense_ensemble(&mut rng, 3, w, h);
        let t = 0.37;
        let mid = v1.scale(t).add(&v2.scale(1.0 - t));
        let d_mid = expected_distortion(&x, &mid, &ensemble).unwrap();
        let d1 = expected_distortion(&x, &v1, &ensemble).unwrap();
        let d2 = expected_distortion(&x, &v2, &ensemble).unwrap();
        assert!(d_mid <= t * d1 + (1.0 - t) * d2 + 1e-9);
    }
}

/// The update solved for a 16x16 instance with the 15x15-kernel blur
/// ensemble (sigmas 0.6/0.8/1.0, probabilities 0.6/0.3/0.1) must match a
/// dense 256x256 direct solve.
#[test]
fn z_update_matches_dense_solve_with_blur_ensemble() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    let (w, h) = (16, 16);
    let n = w * h;
    let x = random_signal(&mut rng, w, h);
    let v = random_signal(&mut rng, w, h);
    let beta = 1.0;

    let sigmas = [0.6, 0.8, 1.0];
    let probs = [0.6, 0.3, 0.1];
    let mut pairs = Vec::new();
    let mut system = DenseMatrix::identity(n);
    for v in system.data.iter_mut() {
        *v *= beta;
    }
    let mut rhs = vec![0.0; n];
    for (&sigma, &p) in sigmas.iter().zip(&probs) {
        let kernel = gaussian_kernel(15, sigma).unwrap();
        let hm = dense_operator_matrix(&kernel, BoundaryMode::Periodic, w, h);
        let ht = hm.transpose();
        system.add_scaled(&ht.matmul(&hm), p);
        let htx = ht.matvec(x.samples());
        for (r, hx) in rhs.iter_mut().zip(&htx) {
            *r += p * hx;
        }
        pairs.push((BlurOperator::new(kernel, BoundaryMode::Periodic), p));
    }
    for (r, vi) in rhs.iter_mut().zip(v.samples()) {
        *r += beta * vi;
    }
    let expected = lu_solve(system, rhs);

    let ensemble = DegradationEnsemble::from_pairs(pairs).unwrap();
    let ctx = ZUpdateContext::new(&ensemble, &x, beta).unwrap();
    let z = z_update(&ctx, &v).unwrap();
    assert!(rel_err(z.samples(), &expected) < 1e-9);

    let cg = iterative_z_update(&ctx, &v, 1e-12, 1000).unwrap();
    assert!(rel_err(cg.signal.samples(), &expected) < 1e-9);
}

/// Perturbing the returned minimizer must not decrease the subproblem
/// objective `sum_k p_k ||x - H_k z||^2 + beta ||z - v||^2`.
#[test]
fn z_update_is_the_subproblem_minimizer() {
    let mut rng = ChaCha8Rng::seed_from_u64(19);
    let (w, h) = (12, 12);
    let x = random_signal(&mut rng, w, h);
    let v = random_signal(&mut rng, w, h);
    let (ensemble, _) = random_dense_ensemble(&mut rng, 3, w, h);
    let beta = 0.8;
    let ctx = ZUpdateContext::new(&ensemble, &x, beta).unwrap();
    let z = z_update(&ctx, &v).unwrap();

    let objective = |z: &Signal| -> f64 {
        let mut total = beta * z.sub(&v).dot(&z.sub(&v));
        for entry in ensemble.entries() {
            let hz = entry.operator.apply(z).unwrap();
            let r = x.sub(&hz);
            total += entry.probability * r.dot(&r);
        }
        total
    };
    let at_min = objective(&z);
    for _ in 0..20 {
        let delta = random_signal(&mut rng, w, h).scale(0.01 / 320.0);
        let perturbed = objective(&z.add(&delta));
        assert!(perturbed >= at_min - 1e-9 * at_min.max(1.0));
    }
}

/// For fixed x the solution is affine in v: differences of solutions equal
/// the homogeneous solve (x = 0) of the difference.
#[test]
fn z_update_is_affine_in_v() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let (w, h) = (10, 10);
    let x = random_signal(&mut rng, w, h);
    let v1 = random_signal(&mut rng, w, h);
    let v2 = random_signal(&mut rng, w, h);
    let (ensemble, _) = random_dense_ensemble(&mut rng, 2, w, h);
    let beta = 2.5;

    let ctx = ZUpdateContext::new(&ensemble, &x, beta).unwrap();
    let lhs = z_update(&ctx, &v1).unwrap().sub(&z_update(&ctx, &v2).unwrap());

    let zero = x.scale(0.0);
    let ctx0 = ZUpdateContext::new(&ensemble, &zero, beta).unwrap();
    let rhs = z_update(&ctx0, &v1.sub(&v2)).unwrap();
    assert!(rel_err(lhs.samples(), rhs.samples()) < 1e-9);
}

/// The periodic deconvolve-then-compress solve must match a dense direct
/// solve of its normal equations
/// `(sum_k p_k H_k' H_k + r L' L) w = sum_k p_k H_k' x`.
#[test]
fn predeconv_matches_dense_tikhonov_solve() {
    use netcomp_core::baselines::{laplacian_kernel, predeconv_signal};

    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let (w, h) = (16, 16);
    let n = w * h;
    let x = random_signal(&mut rng, w, h);
    let reg = 0.02;

    let kernels: Vec<_> = (0..3).map(|_| random_unit_kernel(&mut rng, 2)).collect();
    let probs = random_probabilities(&mut rng, 3);
    let ensemble = DegradationEnsemble::from_pairs(
        kernels
            .iter()
            .zip(&probs)
            .map(|(k, &p)| (BlurOperator::new(k.clone(), BoundaryMode::Periodic), p)),
    )
    .unwrap();

    let lm = dense_operator_matrix(&laplacian_kernel(), BoundaryMode::Periodic, w, h);
    let mut system = lm.transpose().matmul(&lm);
    for v in system.data.iter_mut() {
        *v *= reg;
    }
    let mut rhs = vec![0.0; n];
    for (k, &p) in kernels.iter().zip(&probs) {
        let hm = dense_operator_matrix(k, BoundaryMode::Periodic, w, h);
        let ht = hm.transpose();
        system.add_scaled(&ht.matmul(&hm), p);
        for (r, hx) in rhs.iter_mut().zip(ht.matvec(x.samples())) {
            *r += p * hx;
        }
    }
    let expected = lu_solve(system, rhs);

    let solved = predeconv_signal(&x, &ensemble, reg).unwrap();
    assert!(rel_err(solved.samples(), &expected) < 1e-8);
}

/// The frequency-domain distortion shortcut used for iteration diagnostics
/// must agree with the spatial definition.
#[test]
fn context_distortion_matches_spatial_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10 {
        let (w, h) = (16, 12);
        let x = random_signal(&mut rng, w, h);
        let v = random_signal(&mut rng, w, h);
        let (ensemble, _) = random_dense_ensemble(&mut rng, 3, w, h);
        let ctx = ZUpdateContext::new(&ensemble, &x, 1.0).unwrap();
        let fast = ctx.expected_distortion_of(&v).unwrap();
        let spatial = expected_distortion(&x, &v, &ensemble).unwrap();
        assert!(
            (fast - spatial).abs() <= 1e-9 * spatial.max(1e-12),
            "freq {fast} vs spatial {spatial}"
        );
    }
}

/// The system operator applied to the solution must reproduce the right-hand
/// side of the normal equations.
#[test]
fn z_update_satisfies_normal_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let (w, h) = (14, 9);
        let x = random_signal(&mut rng, w, h);
        let v = random_signal(&mut rng, w, h);
        let (ensemble, _) = random_dense_ensemble(&mut rng, 3, w, h);
        let beta = 0.3;
        let ctx = ZUpdateContext::new(&ensemble, &x, beta).unwrap();
        let z = z_update(&ctx, &v).unwrap();

        let mut lhs = z.scale(beta);
        let mut rhs = v.scale(beta);
        for entry in ensemble.entries() {
            let hz = entry.operator.apply(&z).unwrap();
            lhs = lhs.add(&entry.operator.apply_adjoint(&hz).unwrap().scale(entry.probability));
            rhs = rhs.add(
                &entry
                    .operator
                    .apply_adjoint(&x)
                    .unwrap()
                    .scale(entry.probability),
            );
        }
        assert!(rel_err(lhs.samples(), rhs.samples()) < 1e-8);
    }
}
