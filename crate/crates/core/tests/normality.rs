mod common;

use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use sngca_core::normality::{anderson_darling_statistic, shapiro_wilk_w, skewness_kurtosis};
use sngca_core::{
    anderson_darling, classify_axes, dagostino_k2, generate, shapiro_wilk, ModelKind, ModelSpec,
    TestVerdict,
};

type TestFn = fn(&[f64], f64) -> sngca_core::Result<TestVerdict>;

fn normal_sample(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

fn laplace_sample(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let e: f64 = Exp1.sample(rng);
            if rng.random::<bool>() {
                e
            } else {
                -e
            }
        })
        .collect()
}

fn rejection_rate(test: TestFn, trials: usize, mut draw: impl FnMut() -> Vec<f64>) -> f64 {
    let hits = (0..trials)
        .filter(|_| test(&draw(), 0.05).unwrap().reject)
        .count();
    hits as f64 / trials as f64
}

#[test]
fn k2_calibrated_on_normal_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let rate = rejection_rate(dagostino_k2, 500, || normal_sample(1000, &mut rng));
    assert!((rate - 0.05).abs() <= 0.02, "rate {rate}");
}

#[test]
fn ad_calibrated_on_normal_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let rate = rejection_rate(anderson_darling, 500, || normal_sample(1000, &mut rng));
    assert!((rate - 0.05).abs() <= 0.02, "rate {rate}");
}

#[test]
fn sw_calibrated_on_normal_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let rate = rejection_rate(shapiro_wilk, 500, || normal_sample(500, &mut rng));
    assert!((rate - 0.05).abs() <= 0.02, "rate {rate}");
}

#[test]
fn k2_detects_bimodal_mixture() {
    let mut rng = ChaCha8Rng::seed_from_u64(34);
    let mut draw = || -> Vec<f64> {
        (0..1000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                if rng.random::<bool>() { z + 3.0 } else { z - 3.0 }
            })
            .collect()
    };
    let (_, b2) = skewness_kurtosis(&draw()).unwrap();
    assert!(b2 < 3.0);
    let rate = rejection_rate(dagostino_k2, 100, draw);
    assert!(rate >= 0.95, "rate {rate}");
}

#[test]
fn ad_detects_uniform() {
    let mut rng = ChaCha8Rng::seed_from_u64(35);
    let s3 = 3f64.sqrt();
    let rate = rejection_rate(anderson_darling, 100, || {
        (0..1000).map(|_| rng.random_range(-s3..s3)).collect()
    });
    assert!(rate >= 0.99, "rate {rate}");
}

#[test]
fn sw_detects_laplace() {
    let mut rng = ChaCha8Rng::seed_from_u64(36);
    let rate = rejection_rate(shapiro_wilk, 100, || laplace_sample(500, &mut rng));
    assert!(rate >= 0.95, "rate {rate}");
}

#[test]
fn union_rule_false_alarm_rate_on_normal_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let d = 5;
    let axes = Array2::<f64>::eye(d);
    let mut flags = 0;
    let trials = 200;
    for _ in 0..trials {
        let data = common::gaussian_matrix(1000, d, &mut rng);
        flags += classify_axes(data.view(), axes.view(), 0.05, &mut rng)
            .unwrap()
            .iter()
            .filter(|f| **f)
            .count();
    }
    let rate = flags as f64 / (trials * d) as f64;
    assert!(rate <= 0.15, "rate {rate}");
}

#[test]
fn disk_axes_flagged_in_model_c() {
    let mut rng = ChaCha8Rng::seed_from_u64(38);
    let d = 10;
    let axes = Array2::<f64>::eye(d);
    let trials = 100;
    let mut both = 0;
    for t in 0..trials {
        let g = generate(&ModelSpec::new(ModelKind::UniformDisk, d, 1000, 500 + t)).unwrap();
        let flags = classify_axes(g.unrotated.view(), axes.view(), 0.05, &mut rng).unwrap();
        both += (flags[0] && flags[1]) as usize;
    }
    assert!(both as f64 / trials as f64 >= 0.95, "{both}/{trials}");
}

#[test]
fn laplace_axis_flagged() {
    let mut rng = ChaCha8Rng::seed_from_u64(39);
    let trials = 50;
    let mut hits = 0;
    for _ in 0..trials {
        let mut data = common::gaussian_matrix(1000, 3, &mut rng);
        for (v, l) in data.column_mut(0).iter_mut().zip(laplace_sample(1000, &mut rng)) {
            *v = l;
        }
        let axes = Array2::<f64>::eye(3);
        hits += classify_axes(data.view(), axes.view(), 0.05, &mut rng).unwrap()[0] as usize;
    }
    assert!(hits as f64 / trials as f64 >= 0.95, "{hits}/{trials}");
}

#[test]
fn subsampling_is_seeded() {
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let data = common::gaussian_matrix(5000, 4, &mut rng);
    let axes = Array2::<f64>::eye(4);
    let a = classify_axes(data.view(), axes.view(), 0.05, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    let b = classify_axes(data.view(), axes.view(), 0.05, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(a, b);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statistics_are_affine_invariant(
        seed in any::<u64>(),
        a in 0.01f64..100.0,
        b in -1000.0f64..1000.0,
        n in 20usize..400,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = normal_sample(n, &mut rng);
        let y: Vec<f64> = x.iter().map(|v| a * v + b).collect();
        let kx = dagostino_k2(&x, 0.05).unwrap().statistic;
        let ky = dagostino_k2(&y, 0.05).unwrap().statistic;
        prop_assert!(kx >= 0.0);
        prop_assert!((kx - ky).abs() <= 1e-8 * kx.max(1.0));
        let ax = anderson_darling_statistic(&x).unwrap();
        let ay = anderson_darling_statistic(&y).unwrap();
        prop_assert!(ax.is_finite());
        prop_assert!((ax - ay).abs() <= 1e-8 * ax.max(1.0));
        let wx = shapiro_wilk_w(&x).unwrap();
        let wy = shapiro_wilk_w(&y).unwrap();
        prop_assert!(wx > 0.0 && wx <= 1.0);
        prop_assert!((wx - wy).abs() <= 1e-8);
    }
}
