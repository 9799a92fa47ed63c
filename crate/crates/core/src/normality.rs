//! Univariate normality tests used to classify ellipsoid semi-axes.
//!
//! * D'Agostino–Pearson `K² = Z(√b₁)² + Z(b₂)²`, with D'Agostino's (1970)
//!   skewness transform and the Anscombe–Glynn (1983) kurtosis transform,
//!   compared against the χ²₂ quantile `−2 ln α`.
//! * Anderson–Darling with Stephens' small-sample factor
//!   `c = 1 + 0.75/N + 2.25/N²` (mean and variance estimated).
//! * Shapiro–Wilk with Royston's polynomial approximations of the
//!   coefficients and the normalizing transform of `ln(1 − W)`.

use ndarray::{ArrayView1, ArrayView2};
use rand::seq::index;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::erf::erfc;

use crate::error::{Result, SngcaError};

/// Largest sample handed to the tests; larger inputs are subsampled.
pub const MAX_TEST_SAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TestKind {
    DAgostinoK2,
    AndersonDarling,
    ShapiroWilk,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestVerdict {
    pub statistic: f64,
    pub reject: bool,
    pub alpha: f64,
    pub test_kind: TestKind,
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(SngcaError::UnsupportedAlpha(alpha))
    }
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("standard normal")
}

/// `ln Φ(x)`, accurate far into the lower tail.
fn log_norm_cdf(x: f64) -> f64 {
    if x > -30.0 {
        (0.5 * erfc(-x / std::f64::consts::SQRT_2)).ln()
    } else {
        // Mills-ratio expansion
        let x2 = x * x;
        -0.5 * x2 - (-x).ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
            + (1.0 - 1.0 / x2 + 3.0 / (x2 * x2)).ln()
    }
}

/// Sample skewness `√b₁` and kurtosis `b₂` from central moments
/// (population normalization).
pub fn skewness_kurtosis(samples: &[f64]) -> Result<(f64, f64)> {
    let n = samples.len();
    if n < 2 {
        return Err(SngcaError::TooFewSamples { n, min: 2 });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for &x in samples {
        let e = x - mean;
        let e2 = e * e;
        m2 += e2;
        m3 += e2 * e;
        m4 += e2 * e2;
    }
    m2 /= nf;
    m3 /= nf;
    m4 /= nf;
    if !(m2 > 0.0) {
        return Err(SngcaError::ConstantSample);
    }
    Ok((m3 / m2.powf(1.5), m4 / (m2 * m2)))
}

/// D'Agostino's normalizing transform of the sample skewness.
fn skewness_z(sqrt_b1: f64, n: f64) -> f64 {
    let y = sqrt_b1 * ((n + 1.0) * (n + 3.0) / (6.0 * (n - 2.0))).sqrt();
    let beta2 = 3.0 * (n * n + 27.0 * n - 70.0) * (n + 1.0) * (n + 3.0)
        / ((n - 2.0) * (n + 5.0) * (n + 7.0) * (n + 9.0));
    let w2 = -1.0 + (2.0 * (beta2 - 1.0)).sqrt();
    let delta = 1.0 / (0.5 * w2.ln()).sqrt();
    let a = (2.0 / (w2 - 1.0)).sqrt();
    let t = y / a;
    delta * (t + (t * t + 1.0).sqrt()).ln()
}

/// Anscombe–Glynn normalizing transform of the sample kurtosis.
fn kurtosis_z(b2: f64, n: f64) -> f64 {
    let mean = 3.0 * (n - 1.0) / (n + 1.0);
    let var = 24.0 * n * (n - 2.0) * (n - 3.0) / ((n + 1.0) * (n + 1.0) * (n + 3.0) * (n + 5.0));
    let x = (b2 - mean) / var.sqrt();
    let sqrt_beta1 = 6.0 * (n * n - 5.0 * n + 2.0) / ((n + 7.0) * (n + 9.0))
        * (6.0 * (n + 3.0) * (n + 5.0) / (n * (n - 2.0) * (n - 3.0))).sqrt();
    let a = 6.0 + 8.0 / sqrt_beta1 * (2.0 / sqrt_beta1 + (1.0 + 4.0 / (sqrt_beta1 * sqrt_beta1)).sqrt());
    let term1 = 1.0 - 2.0 / (9.0 * a);
    let denom = 1.0 + x * (2.0 / (a - 4.0)).sqrt();
    let term2 = ((1.0 - 2.0 / a) / denom).cbrt();
    (term1 - term2) / (2.0 / (9.0 * a)).sqrt()
}

pub fn dagostino_k2(samples: &[f64], alpha: f64) -> Result<TestVerdict> {
    check_alpha(alpha)?;
    let n = samples.len();
    if n < 20 {
        return Err(SngcaError::TooFewSamples { n, min: 20 });
    }
    let (sqrt_b1, b2) = skewness_kurtosis(samples)?;
    let nf = n as f64;
    let zs = skewness_z(sqrt_b1, nf);
    let zk = kurtosis_z(b2, nf);
    let k2 = zs * zs + zk * zk;
    // χ²₂ upper quantile
    let critical = -2.0 * alpha.ln();
    Ok(TestVerdict {
        statistic: k2,
        reject: k2 > critical,
        alpha,
        test_kind: TestKind::DAgostinoK2,
    })
}

/// Critical values of the modified statistic for the tabled levels.
pub fn anderson_darling_critical_value(alpha: f64) -> Result<f64> {
    const TABLE: [(f64, f64); 5] = [
        (0.10, 0.631),
        (0.05, 0.752),
        (0.025, 0.873),
        (0.01, 1.035),
        (0.005, 1.159),
    ];
    TABLE
        .iter()
        .find(|(a, _)| (a - alpha).abs() < 1e-12)
        .map(|&(_, cv)| cv)
        .ok_or(SngcaError::UnsupportedAlpha(alpha))
}

/// Modified Anderson–Darling statistic `T̂ = c·A²`.
pub fn anderson_darling_statistic(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 8 {
        return Err(SngcaError::TooFewSamples { n, min: 8 });
    }
    let nf = n as f64;
    let mean = samples.iter().sum::<f64>() / nf;
    let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (nf - 1.0);
    if !(var > 0.0) {
        return Err(SngcaError::ConstantSample);
    }
    let sd = var.sqrt();
    let mut z: Vec<f64> = samples.iter().map(|x| (x - mean) / sd).collect();
    z.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let mut s = 0.0;
    for i in 0..n {
        let lower = log_norm_cdf(z[i]);
        // ln(1 − Φ(z)) = ln Φ(−z)
        let upper = log_norm_cdf(-z[n - 1 - i]);
        s += (2.0 * (i as f64) + 1.0) * (lower + upper);
    }
    let a2 = -nf - s / nf;
    let c = 1.0 + 0.75 / nf + 2.25 / (nf * nf);
    Ok(c * a2)
}

pub fn anderson_darling(samples: &[f64], alpha: f64) -> Result<TestVerdict> {
    let cv = anderson_darling_critical_value(alpha)?;
    let t = anderson_darling_statistic(samples)?;
    Ok(TestVerdict {
        statistic: t,
        reject: t > cv,
        alpha,
        test_kind: TestKind::AndersonDarling,
    })
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}

/// Shapiro–Wilk `W` for `N ≥ 3` using Royston's approximation of the
/// coefficients `a_i`.
pub fn shapiro_wilk_w(samples: &[f64]) -> Result<f64> {
    let n = samples.len();
    if n < 3 {
        return Err(SngcaError::TooFewSamples { n, min: 3 });
    }
    let mut x = samples.to_vec();
    x.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    if !(ss > 0.0) {
        return Err(SngcaError::ConstantSample);
    }

    let half = n / 2;
    let a = royston_coefficients(n);
    let mut b = 0.0;
    for i in 0..half {
        b += a[i] * (x[n - 1 - i] - x[i]);
    }
    Ok((b * b / ss).min(1.0))
}

/// Upper-half coefficients `a_n, a_{n−1}, …` (largest first).
fn royston_coefficients(n: usize) -> Vec<f64> {
    let half = n / 2;
    if n == 3 {
        return vec![std::f64::consts::FRAC_1_SQRT_2];
    }
    const C1: [f64; 6] = [0.0, 0.221157, -0.147981, -2.071190, 4.434685, -2.706056];
    const C2: [f64; 6] = [0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633];
    let nf = n as f64;
    let normal = std_normal();
    let m: Vec<f64> = (1..=half)
        .map(|i| -normal.inverse_cdf((i as f64 - 0.375) / (nf + 0.25)))
        .collect();
    let summ2 = 2.0 * m.iter().map(|v| v * v).sum::<f64>();
    let ssumm2 = summ2.sqrt();
    let rsn = 1.0 / nf.sqrt();
    let a1 = poly(&C1, rsn) + m[0] / ssumm2;

    let mut a = vec![0.0; half];
    a[0] = a1;
    let (first_free, fac) = if n > 5 {
        let a2 = m[1] / ssumm2 + poly(&C2, rsn);
        a[1] = a2;
        let fac = ((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1])
            / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2))
            .sqrt();
        (2, fac)
    } else {
        let fac = ((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1)).sqrt();
        (1, fac)
    };
    for i in first_free..half {
        a[i] = m[i] / fac;
    }
    a
}

/// Royston's normal approximation `z = (ln(1 − W) − μ)/σ` for `N ≥ 12`.
pub fn shapiro_wilk_z(w: f64, n: usize) -> f64 {
    const C5: [f64; 4] = [-1.5861, -0.31082, -0.083751, 0.0038915];
    const C6: [f64; 3] = [-0.4803, -0.082676, 0.0030302];
    let ln_n = (n as f64).ln();
    let mu = poly(&C5, ln_n);
    let sigma = poly(&C6, ln_n).exp();
    ((1.0 - w).max(f64::MIN_POSITIVE).ln() - mu) / sigma
}

pub fn shapiro_wilk(samples: &[f64], alpha: f64) -> Result<TestVerdict> {
    check_alpha(alpha)?;
    let n = samples.len();
    if n < 20 {
        return Err(SngcaError::TooFewSamples { n, min: 20 });
    }
    if n > MAX_TEST_SAMPLES {
        return Err(SngcaError::TooManySamples {
            n,
            max: MAX_TEST_SAMPLES,
        });
    }
    let w = shapiro_wilk_w(samples)?;
    let z = shapiro_wilk_z(w, n);
    let critical = std_normal().inverse_cdf(1.0 - alpha);
    Ok(TestVerdict {
        statistic: w,
        reject: z > critical,
        alpha,
        test_kind: TestKind::ShapiroWilk,
    })
}

/// All three verdicts for one sample; non-Gaussian iff any test rejects.
pub fn test_all(samples: &[f64], alpha: f64) -> Result<[TestVerdict; 3]> {
    Ok([
        dagostino_k2(samples, alpha)?,
        anderson_darling(samples, alpha)?,
        shapiro_wilk(samples, alpha)?,
    ])
}

/// Flags each axis (column of `axes`) whose projected data fail normality
/// under at least one of the three tests. Samples beyond
/// [`MAX_TEST_SAMPLES`] are subsampled with `rng`.
pub fn classify_axes(
    samples: ArrayView2<f64>,
    axes: ArrayView2<f64>,
    alpha: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<bool>> {
    let (n, d) = samples.dim();
    if axes.nrows() != d {
        return Err(SngcaError::DimensionMismatch {
            expected: d,
            found: axes.nrows(),
        });
    }
    let rows: Vec<usize> = if n > MAX_TEST_SAMPLES {
        let mut idx = index::sample(rng, n, MAX_TEST_SAMPLES).into_vec();
        idx.sort_unstable();
        idx
    } else {
        (0..n).collect()
    };
    axes.columns()
        .into_iter()
        .map(|axis| {
            let projected = project_rows(samples, &rows, axis);
            let verdicts = test_all(&projected, alpha)?;
            Ok(verdicts.iter().any(|v| v.reject))
        })
        .collect()
}

fn project_rows(samples: ArrayView2<f64>, rows: &[usize], axis: ArrayView1<f64>) -> Vec<f64> {
    rows.iter().map(|&i| samples.row(i).dot(&axis)).collect()
}
