mod common;

use ndarray::{array, Array2, Axis};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sngca_core::ellipsoid::{build_projector, mvee_round, principal_axes};
use sngca_core::linalg::{random_orthogonal, symmetric_eigen};
use sngca_core::Ellipsoid;

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

fn random_betas(rng: &mut ChaCha8Rng) -> Array2<f64> {
    let d = rng.random_range(2..=8);
    let j = rng.random_range(d..=6 * d);
    // anisotropic clouds make the rounding iterate
    let mut b = common::gaussian_matrix(j, d, rng);
    for mut col in b.columns_mut() {
        col *= rng.random_range(0.1..10.0);
    }
    b
}

#[test]
fn covering_invariant_on_random_runs() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut iterated = 0;
    for _ in 0..500 {
        let betas = random_betas(&mut rng);
        let d = betas.ncols() as f64;
        let ell = mvee_round(betas.view(), 2.0).unwrap();
        let cover = ell.covering_matrix();
        let max_q = betas
            .rows()
            .into_iter()
            .map(|b| b.dot(&cover.dot(&b)))
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((max_q - ell.delta_star).abs() <= 1e-9 * max_q);
        assert!(ell.delta_star <= 2.0 * d);
        // tight form of the termination test
        for b in betas.rows() {
            assert!(b.dot(&cover.dot(&b)) / ell.delta_star <= 1.0 + 1e-9);
        }
        if ell.iterations > 0 {
            iterated += 1;
        }
    }
    assert!(iterated > 100, "only {iterated} runs needed updates");
}

#[test]
fn delta_history_is_non_increasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let mut violations = 0;
    let mut worst = 1.0f64;
    for _ in 0..500 {
        let betas = random_betas(&mut rng);
        let ell = mvee_round(betas.view(), 2.0).unwrap();
        let mut bad = false;
        for w in ell.delta_history.windows(2) {
            if w[1] > w[0] * (1.0 + 1e-12) {
                bad = true;
                worst = worst.max(w[1] / w[0]);
            }
        }
        violations += bad as usize;
    }
    assert_eq!(
        violations, 0,
        "{violations}/500 runs with δ increasing somewhere, worst ratio {worst:.3}"
    );
}

// The quantity the Khachiyan step provably increases.
#[test]
fn log_det_of_moment_matrix_is_non_decreasing() {
    let mut rng = ChaCha8Rng::seed_from_u64(28);
    for _ in 0..200 {
        let betas = random_betas(&mut rng);
        let d = betas.ncols() as f64;
        let j = betas.nrows();
        let mut m = betas.t().dot(&betas) / j as f64;
        let mut prev = log_det(&m);
        let ell = mvee_round(betas.view(), 2.0).unwrap();
        for _ in 0..ell.iterations {
            let minv = common::to_na(m.view()).try_inverse().unwrap();
            let (k, delta) = betas
                .rows()
                .into_iter()
                .map(|b| {
                    let bn = common::to_na_vec(b);
                    (bn.transpose() * &minv * &bn)[(0, 0)]
                })
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |a, (k, q)| if q > a.1 { (k, q) } else { a });
            let tau = (delta - d) / (d * (delta - 1.0));
            let b = betas.row(k);
            let outer = Array2::from_shape_fn((b.len(), b.len()), |(x, y)| b[x] * b[y]);
            m = m * (1.0 - tau) + outer * tau;
            let cur = log_det(&m);
            assert!(cur >= prev - 1e-9 * prev.abs().max(1.0));
            prev = cur;
        }
        let final_ld = -log_det(&ell.covering_matrix());
        assert!((final_ld - prev).abs() < 1e-6 * prev.abs().max(1.0), "{final_ld} vs {prev}");
    }
}

fn log_det(m: &Array2<f64>) -> f64 {
    common::to_na(m.view()).cholesky().unwrap().l().diagonal().iter().map(|v| 2.0 * v.ln()).sum()
}

#[test]
fn shape_is_symmetric_positive_definite() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let betas = random_betas(&mut rng);
        let ell = mvee_round(betas.view(), 2.0).unwrap();
        let b = ell.shape().to_owned();
        assert!(max_abs_diff(&b, &b.t().to_owned()) <= 1e-10 * b.iter().fold(0.0f64, |m, v| m.max(v.abs())));
        let (vals, _) = symmetric_eigen(b.view()).unwrap();
        assert!(vals.iter().all(|v| *v > 0.0));
    }
}

#[test]
fn inscribed_ellipsoid_lies_in_hull() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..50 {
        let d = rng.random_range(2..=3);
        let j = rng.random_range(d + 1..=12);
        let mut betas = common::gaussian_matrix(j, d, &mut rng);
        betas.column_mut(0).mapv_inplace(|v| v * 4.0);
        let ell = mvee_round(betas.view(), 2.0).unwrap();
        let inscribed = ell.covering_matrix();
        for _ in 0..100 {
            let v = common::random_unit(d, &mut rng);
            let u = &v / v.dot(&inscribed.dot(&v)).sqrt();
            let lambda = 1.0 / common::min_l1_representation(betas.view(), u.view());
            assert!(lambda >= 1.0 - 1e-6, "λ = {lambda}");
        }
    }
}

#[test]
fn rotation_equivariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..50 {
        let betas = random_betas(&mut rng);
        let d = betas.ncols();
        let r = random_orthogonal(d, &mut rng);
        let a = mvee_round(betas.view(), 2.0).unwrap();
        let b = mvee_round(betas.dot(&r.t()).view(), 2.0).unwrap();
        let expected = r.dot(&a.shape()).dot(&r.t());
        let scale = expected.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max_abs_diff(&b.shape().to_owned(), &expected) <= 1e-6 * scale.max(1.0));
        assert_eq!(a.iterations, b.iterations);
    }
}

#[test]
fn principal_axes_match_power_iteration() {
    let mut rng = ChaCha8Rng::seed_from_u64(26);
    for _ in 0..30 {
        let d = rng.random_range(2..=8);
        let g = common::gaussian_matrix(d, d, &mut rng);
        let spd = g.dot(&g.t()) + Array2::<f64>::eye(d) * 0.5;
        // B⁻¹ = spd, so B = spd⁻¹ via nalgebra
        let inv = common::to_na(spd.view()).try_inverse().unwrap();
        let b = Array2::from_shape_fn((d, d), |(i, j)| 0.5 * (inv[(i, j)] + inv[(j, i)]));
        let ell = Ellipsoid::from_shape(b).unwrap();
        let axes = principal_axes(&ell).unwrap();
        let oracle = common::power_iteration_eigenvalues(spd.view(), &mut rng);
        for (a, o) in axes.eigenvalues.iter().zip(&oracle) {
            assert!((a - o).abs() <= 1e-7 * o.abs().max(1.0), "{a} vs {o}");
        }
        let recon = axes
            .eigenvectors
            .dot(&Array2::from_diag(&axes.eigenvalues))
            .dot(&axes.eigenvectors.t());
        let binv = ell.shape_inverse().to_owned();
        let norm = binv.iter().map(|v| v * v).sum::<f64>().sqrt();
        let err = (&recon - &binv).iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!(err <= 1e-8 * norm);
        let gram = axes.eigenvectors.t().dot(&axes.eigenvectors);
        assert!(max_abs_diff(&gram, &Array2::eye(d)) < 1e-10);
    }
}

#[test]
fn full_rank_projector_is_identity() {
    let betas = array![[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5], [1.0, 1.0, 1.0]];
    let ell = mvee_round(betas.view(), 2.0).unwrap();
    let axes = principal_axes(&ell).unwrap();
    let p = build_projector(&axes, 3).unwrap();
    assert!(max_abs_diff(&p.projector().to_owned(), &Array2::eye(3)) < 1e-10);
}

#[test]
fn long_axis_recovers_dominant_direction() {
    let mut rng = ChaCha8Rng::seed_from_u64(27);
    let d = 5;
    let r = random_orthogonal(d, &mut rng);
    let mut betas = common::gaussian_matrix(60, d, &mut rng);
    betas.column_mut(0).mapv_inplace(|v| v * 20.0);
    let rotated = betas.dot(&r.t());
    let ell = mvee_round(rotated.view(), 2.0).unwrap();
    let axes = principal_axes(&ell).unwrap();
    let top = axes.eigenvectors.index_axis(Axis(1), 0);
    let cos = top.dot(&r.column(0)).abs();
    assert!(cos > 0.99, "cos = {cos}");
}
