//! Shared numerical types: datasets with their normalization state and
//! subspace estimates with projector metrics.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SngcaError};
use crate::linalg;

/// An N×d sample matrix, one observation per row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    samples: Array2<f64>,
    col_std: Array1<f64>,
    normalized: bool,
}

impl Dataset {
    /// Wraps raw samples. Requires N ≥ 2 and d ≥ 2.
    pub fn new(samples: Array2<f64>) -> Result<Self> {
        let (n, d) = samples.dim();
        if n < 2 || d < 2 {
            return Err(SngcaError::InvalidShape {
                rows: n,
                cols: d,
                min_rows: 2,
                min_cols: 2,
            });
        }
        Ok(Dataset {
            samples,
            col_std: Array1::ones(d),
            normalized: false,
        })
    }

    pub fn samples(&self) -> ArrayView2<'_, f64> {
        self.samples.view()
    }

    pub fn into_samples(self) -> Array2<f64> {
        self.samples
    }

    /// Divisors applied by [`normalize`]; all ones for raw data.
    pub fn col_std(&self) -> &Array1<f64> {
        &self.col_std
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn dim(&self) -> usize {
        self.samples.ncols()
    }
}

/// Recenters every column and divides it by its sample standard deviation
/// (N−1 denominator).
pub fn normalize(data: &Dataset) -> Result<Dataset> {
    let n = data.n_samples() as f64;
    let mut samples = data.samples.clone();
    let mut col_std = Array1::zeros(data.dim());
    for (j, mut col) in samples.axis_iter_mut(Axis(1)).enumerate() {
        let mean = col.sum() / n;
        col.mapv_inplace(|x| x - mean);
        let var = col.iter().map(|x| x * x).sum::<f64>() / (n - 1.0);
        let sd = var.sqrt();
        if !(sd > 0.0) || !sd.is_finite() {
            return Err(SngcaError::ZeroVarianceColumn(j));
        }
        col.mapv_inplace(|x| x / sd);
        col_std[j] = sd;
    }
    Ok(Dataset {
        samples,
        col_std,
        normalized: true,
    })
}

/// Orthonormal basis of an m-dimensional subspace of ℝᵈ together with its
/// orthogonal projector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceEstimate {
    basis: Array2<f64>,
    projector: Array2<f64>,
}

impl SubspaceEstimate {
    /// Builds an estimate from a basis whose columns are already orthonormal
    /// (checked to 1e-10).
    pub fn from_orthonormal(basis: Array2<f64>) -> Result<Self> {
        let m = basis.ncols();
        let gram = basis.t().dot(&basis);
        let err = (&gram - &Array2::<f64>::eye(m))
            .iter()
            .fold(0.0f64, |acc, x| acc.max(x.abs()));
        if err > 1e-10 {
            return Err(SngcaError::InvalidConfig(format!(
                "basis columns are not orthonormal (max deviation {err:e})"
            )));
        }
        let projector = basis.dot(&basis.t());
        Ok(SubspaceEstimate { basis, projector })
    }

    /// Orthonormalizes the columns of `vectors` and spans them.
    pub fn from_span(vectors: ArrayView2<f64>) -> Self {
        let basis = linalg::orthonormalize_columns(vectors, 1e-10);
        let projector = basis.dot(&basis.t());
        SubspaceEstimate { basis, projector }
    }

    /// The zero subspace of ℝᵈ.
    pub fn empty(d: usize) -> Self {
        SubspaceEstimate {
            basis: Array2::zeros((d, 0)),
            projector: Array2::zeros((d, d)),
        }
    }

    pub fn basis(&self) -> ArrayView2<'_, f64> {
        self.basis.view()
    }

    pub fn projector(&self) -> ArrayView2<'_, f64> {
        self.projector.view()
    }

    /// Intrinsic dimension.
    pub fn m(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// The image of this subspace under `diag(factors)`, re-orthonormalized.
    /// Maps subspaces between raw and normalized coordinates.
    pub fn scale_rows(&self, factors: ArrayView1<f64>) -> Result<Self> {
        if factors.len() != self.ambient_dim() {
            return Err(SngcaError::DimensionMismatch {
                expected: self.ambient_dim(),
                found: factors.len(),
            });
        }
        let mut scaled = self.basis.clone();
        for (mut row, f) in scaled.rows_mut().into_iter().zip(factors.iter()) {
            row *= *f;
        }
        Ok(SubspaceEstimate::from_span(scaled.view()))
    }
}

/// Squared Frobenius distance `Tr[(Π̂ − Π*)²]` between two projectors.
pub fn subspace_error(est: &SubspaceEstimate, truth: &SubspaceEstimate) -> Result<f64> {
    let (a, b) = (est.projector(), truth.projector());
    if a.dim() != b.dim() {
        return Err(SngcaError::DimensionMismatch {
            expected: b.nrows(),
            found: a.nrows(),
        });
    }
    Ok(a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Cosine of the smallest principal angle between the column spans of two
/// orthonormal bases, i.e. the largest singular value of `aᵀb`.
pub fn max_subspace_cosine(a: ArrayView2<f64>, b: ArrayView2<f64>) -> Result<f64> {
    if a.nrows() != b.nrows() {
        return Err(SngcaError::DimensionMismatch {
            expected: a.nrows(),
            found: b.nrows(),
        });
    }
    if a.ncols() == 0 || b.ncols() == 0 {
        return Ok(0.0);
    }
    let cross = a.t().dot(&b);
    Ok(linalg::spectral_norm(cross.view())?.clamp(0.0, 1.0))
}
