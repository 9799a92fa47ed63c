//! Rounding ellipsoids for the symmetric hull `conv{±β̂_j}`.
//!
//! Khachiyan-style barycentric coordinate ascent on the weights `u` of the
//! moment matrix `M(u) = Σ u_j β_j β_jᵀ`. Starting from uniform weights (the
//! inverse empirical second-moment matrix), each pass moves weight towards the
//! point `k*` with the largest Mahalanobis norm `δ = β_k*ᵀ M⁻¹ β_k*`:
//!
//! ```text
//! τ = (δ − d) / (d (δ − 1))
//! M⁻¹ ← (M⁻¹ − τ/(1+ν) · x xᵀ) / (1 − τ),   x = M⁻¹ β_k*,  1 + ν = δ/d
//! ```
//!
//! until `δ ≤ C·d`. At that point `{x : xᵀM⁻¹x ≤ 1} ⊆ conv{±β_j} ⊆ {x : xᵀM⁻¹x ≤ δ}`.

use ndarray::{Array1, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SngcaError};
use crate::linalg;
use crate::types::SubspaceEstimate;

pub const DEFAULT_MVEE_C: f64 = 2.0;
const MAX_ROUNDING_ITERATIONS: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    /// Shape `B = M⁻¹ / d`; when the rounding is exact, `{x : xᵀBx ≤ 1}` is the
    /// minimum-volume enclosing ellipsoid.
    shape: Array2<f64>,
    /// `B⁻¹ = d·M`
    shape_inv: Array2<f64>,
    /// `max_j β_jᵀ M⁻¹ β_j` at termination (equals d for an exact MVEE).
    pub delta_star: f64,
    pub iterations: usize,
    /// `δ` observed at every pass, including the terminating one.
    pub delta_history: Vec<f64>,
}

impl Ellipsoid {
    /// Wraps an SPD shape matrix directly (no rounding performed).
    pub fn from_shape(shape: Array2<f64>) -> Result<Self> {
        let (vals, vecs) = linalg::symmetric_eigen(shape.view())?;
        if vals.iter().any(|&v| !(v > 0.0)) {
            return Err(SngcaError::DegenerateSpan);
        }
        let inv_vals = vals.mapv(|v| 1.0 / v);
        let shape_inv = vecs.dot(&Array2::from_diag(&inv_vals)).dot(&vecs.t());
        let d = shape.nrows() as f64;
        Ok(Ellipsoid {
            shape,
            shape_inv,
            delta_star: d,
            iterations: 0,
            delta_history: Vec::new(),
        })
    }

    pub fn shape(&self) -> ArrayView2<'_, f64> {
        self.shape.view()
    }

    pub fn shape_inverse(&self) -> ArrayView2<'_, f64> {
        self.shape_inv.view()
    }

    /// `M⁻¹ = d·B`: the covering ellipsoid is `{x : xᵀ M⁻¹ x ≤ δ*}` and the
    /// inscribed one is `{x : xᵀ M⁻¹ x ≤ 1}`.
    pub fn covering_matrix(&self) -> Array2<f64> {
        let d = self.shape.nrows() as f64;
        self.shape.mapv(|v| v * d)
    }

    pub fn dim(&self) -> usize {
        self.shape.nrows()
    }
}

/// Rounds the symmetric hull of the rows of `betas` with stopping constant `c`.
pub fn mvee_round(betas: ArrayView2<f64>, c: f64) -> Result<Ellipsoid> {
    let (j_count, d) = betas.dim();
    if j_count == 0 || d == 0 {
        return Err(SngcaError::EmptyData);
    }
    if !(c > 1.0) {
        return Err(SngcaError::InvalidConfig(format!(
            "rounding constant must exceed 1, got {c}"
        )));
    }
    if betas.iter().any(|v| !v.is_finite()) {
        return Err(SngcaError::DegenerateSpan);
    }

    let mut m = betas.t().dot(&betas) / j_count as f64;
    let trace: f64 = m.diag().sum();
    if !(trace > 0.0) {
        return Err(SngcaError::DegenerateSpan);
    }
    let (vals, _) = linalg::symmetric_eigen(m.view())?;
    let floor = 1e-10 * trace / d as f64;
    if vals[d - 1] < floor {
        for i in 0..d {
            m[[i, i]] += floor;
        }
    }
    let mut minv = spd_inverse(&m)?;

    let df = d as f64;
    let mut history = Vec::new();
    let mut quad = Array1::<f64>::zeros(j_count);
    for iter in 0..MAX_ROUNDING_ITERATIONS {
        let proj = betas.dot(&minv);
        for (k, (row, prow)) in betas.rows().into_iter().zip(proj.rows()).enumerate() {
            quad[k] = row.dot(&prow);
        }
        let (k_star, delta) = quad
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |acc, (k, &q)| if q > acc.1 { (k, q) } else { acc });
        history.push(delta);
        if delta <= c * df {
            let shape = minv.mapv(|v| v / df);
            let shape_inv = m.mapv(|v| v * df);
            return Ok(Ellipsoid {
                shape,
                shape_inv,
                delta_star: delta,
                iterations: iter,
                delta_history: history,
            });
        }

        let tau = (delta - df) / (df * (delta - 1.0));
        let beta = betas.row(k_star);
        let x = minv.dot(&beta);
        let coef = tau * df / delta;
        let scale = 1.0 / (1.0 - tau);
        for a in 0..d {
            for b in 0..d {
                minv[[a, b]] = (minv[[a, b]] - coef * x[a] * x[b]) * scale;
                m[[a, b]] = (1.0 - tau) * m[[a, b]] + tau * beta[a] * beta[b];
            }
        }
        // keep the inverse exactly symmetric
        for a in 0..d {
            for b in 0..a {
                let s = 0.5 * (minv[[a, b]] + minv[[b, a]]);
                minv[[a, b]] = s;
                minv[[b, a]] = s;
            }
        }
    }
    Err(SngcaError::MaxIterations(MAX_ROUNDING_ITERATIONS))
}

fn spd_inverse(m: &Array2<f64>) -> Result<Array2<f64>> {
    let (vals, vecs) = linalg::symmetric_eigen(m.view())?;
    if vals.iter().any(|&v| !(v > 0.0)) {
        return Err(SngcaError::DegenerateSpan);
    }
    let inv = vals.mapv(|v| 1.0 / v);
    Ok(vecs.dot(&Array2::from_diag(&inv)).dot(&vecs.t()))
}

/// Spectral decomposition of `B⁻¹`, eigenvalues descending (longest
/// semi-axes first), eigenvectors as columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalAxes {
    pub eigenvalues: Array1<f64>,
    pub eigenvectors: Array2<f64>,
}

pub fn principal_axes(ell: &Ellipsoid) -> Result<PrincipalAxes> {
    let (eigenvalues, eigenvectors) = linalg::symmetric_eigen(ell.shape_inverse())?;
    Ok(PrincipalAxes {
        eigenvalues,
        eigenvectors,
    })
}

/// Projector onto the span of the `m` leading eigenvectors of `B⁻¹`.
/// Equal eigenvalues keep eigenvector index order.
pub fn build_projector(axes: &PrincipalAxes, m: usize) -> Result<SubspaceEstimate> {
    let d = axes.eigenvectors.nrows();
    if m == 0 || m > d {
        return Err(SngcaError::InvalidRank { m, d });
    }
    let basis = axes.eigenvectors.slice(ndarray::s![.., ..m]).to_owned();
    Ok(SubspaceEstimate::from_span(basis.view()))
}
