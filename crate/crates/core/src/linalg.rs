//! Small dense linear-algebra kernels (d is at most a few hundred here).

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Result, SngcaError};

const JACOBI_MAX_SWEEPS: usize = 100;

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Returns `(values, vectors)` with eigenvectors stored as columns, sorted by
/// descending eigenvalue. Ties keep the original index order.
pub fn symmetric_eigen(a: ArrayView2<f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(SngcaError::DimensionMismatch {
            expected: n,
            found: a.ncols(),
        });
    }
    let mut m = a.to_owned();
    // symmetrize against round-off in the caller
    for i in 0..n {
        for j in 0..i {
            let s = 0.5 * (m[[i, j]] + m[[j, i]]);
            m[[i, j]] = s;
            m[[j, i]] = s;
        }
    }
    let mut v = Array2::<f64>::eye(n);
    let scale = frobenius(m.view()).max(f64::MIN_POSITIVE);

    let mut converged = n < 2;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        let off = off_diagonal_norm(m.view());
        if off <= 1e-12 * scale {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = m[[p, q]];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = m[[p, p]];
                let aqq = m[[q, q]];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let mkp = m[[k, p]];
                    let mkq = m[[k, q]];
                    m[[k, p]] = c * mkp - s * mkq;
                    m[[k, q]] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[[p, k]];
                    let mqk = m[[q, k]];
                    m[[p, k]] = c * mpk - s * mqk;
                    m[[q, k]] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged && off_diagonal_norm(m.view()) > 1e-12 * scale {
        return Err(SngcaError::EigenFailure);
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable sort keeps index order on exact ties
    order.sort_by(|&i, &j| m[[j, j]].partial_cmp(&m[[i, i]]).unwrap_or(std::cmp::Ordering::Equal));
    let values = Array1::from_iter(order.iter().map(|&i| m[[i, i]]));
    let mut vectors = Array2::<f64>::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        vectors.column_mut(dst).assign(&v.column(src));
    }
    Ok((values, vectors))
}

pub fn frobenius(a: ArrayView2<f64>) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn off_diagonal_norm(a: ArrayView2<f64>) -> f64 {
    let n = a.nrows();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[[i, j]] * a[[i, j]];
            }
        }
    }
    s.sqrt()
}

pub fn norm2(v: ArrayView1<f64>) -> f64 {
    v.dot(&v).sqrt()
}

/// Largest singular value of `a`.
pub fn spectral_norm(a: ArrayView2<f64>) -> Result<f64> {
    let gram = if a.nrows() >= a.ncols() {
        a.t().dot(&a)
    } else {
        a.dot(&a.t())
    };
    if gram.is_empty() {
        return Ok(0.0);
    }
    let (vals, _) = symmetric_eigen(gram.view())?;
    Ok(vals[0].max(0.0).sqrt())
}

/// Modified Gram-Schmidt on the columns of `a`. Columns that become
/// numerically dependent (relative norm below `tol`) are dropped.
pub fn orthonormalize_columns(a: ArrayView2<f64>, tol: f64) -> Array2<f64> {
    let d = a.nrows();
    let mut kept: Vec<Array1<f64>> = Vec::new();
    for col in a.axis_iter(Axis(1)) {
        let orig = norm2(col);
        let mut v = col.to_owned();
        for _ in 0..2 {
            for q in &kept {
                let proj = q.dot(&v);
                v.scaled_add(-proj, q);
            }
        }
        let n = norm2(v.view());
        if orig > 0.0 && n > tol * orig {
            v /= n;
            kept.push(v);
        }
    }
    let mut out = Array2::zeros((d, kept.len()));
    for (j, q) in kept.iter().enumerate() {
        out.column_mut(j).assign(q);
    }
    out
}

/// Haar-distributed random orthogonal matrix (QR of a Gaussian matrix with
/// sign correction).
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Array2<f64> {
    loop {
        let g = Array2::from_shape_fn((d, d), |_| rng.sample::<f64, _>(StandardNormal));
        let q = orthonormalize_columns(g.view(), 1e-8);
        if q.ncols() == d {
            return q;
        }
    }
}

/// `v · vᵀ`
pub fn outer(v: ArrayView1<f64>) -> Array2<f64> {
    let n = v.len();
    Array2::from_shape_fn((n, n), |(i, j)| v[i] * v[j])
}
