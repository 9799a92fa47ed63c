//! Empirical moment vectors `γ̂_l = N⁻¹ Σ Yᵢ h_l(Yᵢ)` and `η̂_l = N⁻¹ Σ ∇h_l(Yᵢ)`.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SngcaError};
use crate::test_functions::TestFamily;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentPair {
    /// Estimate of `E[X h(X)]`.
    pub gamma_hat: Array1<f64>,
    /// Estimate of `E[∇h(X)]`.
    pub eta_hat: Array1<f64>,
}

/// Moments for test functions `h_l(x) = f(x, ω_l)` with a single family.
/// `omegas` holds one unit direction per row.
pub fn estimate_moments(
    samples: ArrayView2<f64>,
    fam: &TestFamily,
    omegas: ArrayView2<f64>,
) -> Result<Vec<MomentPair>> {
    let families = vec![*fam; omegas.nrows()];
    estimate_moments_with(samples, &families, omegas)
}

/// Like [`estimate_moments`] but with a family per test function.
pub fn estimate_moments_with(
    samples: ArrayView2<f64>,
    families: &[TestFamily],
    omegas: ArrayView2<f64>,
) -> Result<Vec<MomentPair>> {
    let (n, d) = samples.dim();
    let l_count = omegas.nrows();
    if n == 0 || l_count == 0 {
        return Err(SngcaError::EmptyData);
    }
    if omegas.ncols() != d {
        return Err(SngcaError::DimensionMismatch {
            expected: d,
            found: omegas.ncols(),
        });
    }
    if families.len() != l_count {
        return Err(SngcaError::DimensionMismatch {
            expected: l_count,
            found: families.len(),
        });
    }
    for row in omegas.rows() {
        let norm = row.dot(&row).sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(SngcaError::NonUnitDirection(norm));
        }
    }

    let mut gamma = Array2::<f64>::zeros((l_count, d));
    let mut eta = Array2::<f64>::zeros((l_count, d));
    let mut grad = vec![0.0; d];
    for y in samples.rows() {
        for (l, fam) in families.iter().enumerate() {
            let h = fam.value_and_grad_unchecked(y, omegas.row(l), &mut grad);
            let mut g_row = gamma.row_mut(l);
            g_row.scaled_add(h, &y);
            let mut e_row = eta.row_mut(l);
            e_row += &ArrayView1::from(&grad[..]);
        }
    }
    let inv_n = 1.0 / n as f64;
    Ok((0..l_count)
        .map(|l| MomentPair {
            gamma_hat: gamma.row(l).mapv(|v| v * inv_n),
            eta_hat: eta.row(l).mapv(|v| v * inv_n),
        })
        .collect())
}
