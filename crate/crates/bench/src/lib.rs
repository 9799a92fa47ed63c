//! Seeded fixtures shared by the benchmarks.

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sngca_core::{
    estimate_moments, generate, normalize, sample_directions, Dataset, Directions, ModelKind,
    ModelSpec, MomentPair, SngcaConfig, TestFamily,
};

pub fn unit_rows(rows: usize, d: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let mut m = Array2::from_shape_fn((rows, d), |_| rng.random_range(-1.0f64..1.0));
    for mut r in m.rows_mut() {
        let n = r.dot(&r).sqrt();
        r /= n;
    }
    m
}

/// Normalized model C data with `n` samples in dimension `d`.
pub fn model_c(d: usize, n: usize, seed: u64) -> Dataset {
    let g = generate(&ModelSpec::new(ModelKind::UniformDisk, d, n, seed)).expect("valid spec");
    normalize(&g.data).expect("non-degenerate columns")
}

/// Moment pairs for `l` random test directions on model C data.
pub fn moments(d: usize, l: usize, n: usize, seed: u64) -> Vec<MomentPair> {
    let data = model_c(d, n, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let omegas = unit_rows(l, d, &mut rng);
    estimate_moments(data.samples(), &TestFamily::tanh(), omegas.view()).expect("valid moments")
}

/// First-iteration directions with the default `J = 7d`, `L = 6d`.
pub fn first_directions(d: usize, seed: u64) -> (SngcaConfig, Directions) {
    let cfg = SngcaConfig::for_dim(d);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dirs = sample_directions(1, None, &cfg, d, &mut rng);
    (cfg, dirs)
}

/// Anisotropic candidate vectors for the rounding step.
pub fn candidate_cloud(j: usize, d: usize, seed: u64) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = unit_rows(j, d, &mut rng);
    for (k, mut col) in m.columns_mut().into_iter().enumerate() {
        col *= 1.0 + k as f64;
    }
    m
}
