//! Independent oracles shared by the integration and acceptance tests.
//! None of these call into the solver routines they check.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn to_na(a: ArrayView2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[[i, j]])
}

pub fn to_na_vec(a: ArrayView1<f64>) -> DVector<f64> {
    DVector::from_iterator(a.len(), a.iter().copied())
}

pub fn gaussian_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    Array2::from_shape_fn((rows, cols), |_| StandardNormal.sample(rng))
}

pub fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    let v: Array1<f64> = Array1::from_shape_fn(d, |_| StandardNormal.sample(rng));
    let n = v.dot(&v).sqrt();
    v / n
}

/// `min ‖ξ − Hc‖²` over `{c : Gc = 0, ‖c‖₁ ≤ 1}` by nested grid search over
/// the null-space coordinates `c = N t` (`N` from an SVD of `G`). Intended
/// for null spaces of dimension ≤ 3.
pub fn grid_projection_objective(xi: ArrayView1<f64>, h: ArrayView2<f64>, g: ArrayView2<f64>) -> f64 {
    let l = h.ncols();
    let gm = to_na(g);
    let eig = (gm.transpose() * &gm).symmetric_eigen();
    let scale = eig.eigenvalues.max().max(1.0);
    let basis: Vec<DVector<f64>> = (0..l)
        .filter(|&i| eig.eigenvalues[i] <= 1e-12 * scale)
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect();
    let k = basis.len();
    if k == 0 {
        return xi.dot(&xi);
    }
    let hm = to_na(h);
    let xiv = DVector::from_iterator(xi.len(), xi.iter().copied());
    let eval = |t: &[f64]| -> Option<f64> {
        let mut c = DVector::<f64>::zeros(l);
        for (b, ti) in basis.iter().zip(t) {
            c += b * *ti;
        }
        if c.lp_norm(1) > 1.0 {
            return None;
        }
        Some((&xiv - &hm * c).norm_squared())
    };

    let mut center = vec![0.0; k];
    let mut best = eval(&center).expect("origin is feasible");
    let mut radius = 1.0;
    let steps = match k {
        1 => 400,
        2 => 80,
        _ => 16,
    };
    while radius > 1e-7 {
        let h = 2.0 * radius / steps as f64;
        let mut idx = vec![0usize; k];
        let mut next = center.clone();
        loop {
            let t: Vec<f64> = (0..k).map(|i| center[i] - radius + h * idx[i] as f64).collect();
            if let Some(v) = eval(&t) {
                if v < best {
                    best = v;
                    next = t;
                }
            }
            let mut i = 0;
            while i < k {
                idx[i] += 1;
                if idx[i] <= steps {
                    break;
                }
                idx[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
        center = next;
        radius = (4.0 * h).min(radius * 0.5);
    }
    best
}

/// Exact `min ‖ξ − Hc‖²` over `{c : Gc = 0, ‖c‖₁ ≤ 1}` by enumerating faces
/// of the ℓ1 ball: every sign pattern `s ∈ {−1, 0, 1}^L`, with the budget
/// `sᵀc = 1` either imposed or not. On each face the equality-constrained
/// least-squares problem is solved through a null-space parametrization; only
/// feasible, sign-consistent candidates count. The optimum is attained in the
/// relative interior of some face where it is that face's unique minimizer,
/// so the best candidate is the global minimum.
pub fn enumerated_projection_objective(xi: ArrayView1<f64>, h: ArrayView2<f64>, g: ArrayView2<f64>) -> f64 {
    let (d, l) = h.dim();
    let xiv = DVector::from_iterator(d, xi.iter().copied());
    let mut best = xiv.norm_squared();
    let total = 3usize.pow(l as u32);
    for code in 0..total {
        let mut signs = vec![0i8; l];
        let mut c = code;
        for s in signs.iter_mut() {
            *s = (c % 3) as i8 - 1;
            c /= 3;
        }
        let support: Vec<usize> = (0..l).filter(|&i| signs[i] != 0).collect();
        let k = support.len();
        if k == 0 {
            continue;
        }
        let hs = DMatrix::from_fn(d, k, |r, c| h[[r, support[c]]]);
        let gs = DMatrix::from_fn(g.nrows(), k, |r, c| g[[r, support[c]]]);
        for budget in [false, true] {
            let rows = gs.nrows() + budget as usize;
            let mut a = DMatrix::<f64>::zeros(rows, k);
            a.rows_mut(0, gs.nrows()).copy_from(&gs);
            let mut b = DVector::<f64>::zeros(rows);
            if budget {
                for (j, &i) in support.iter().enumerate() {
                    a[(rows - 1, j)] = signs[i] as f64;
                }
                b[rows - 1] = 1.0;
            }
            let c0 = match a.clone().pseudo_inverse(1e-12) {
                Ok(p) => p * &b,
                Err(_) => continue,
            };
            if (&a * &c0 - &b).norm() > 1e-9 {
                continue;
            }
            let ata = a.transpose() * &a;
            let eig = ata.symmetric_eigen();
            let scale = eig.eigenvalues.max().max(1.0);
            let null: Vec<usize> = (0..k).filter(|&i| eig.eigenvalues[i] <= 1e-12 * scale).collect();
            let mut cs = c0.clone();
            if !null.is_empty() {
                let n = DMatrix::from_fn(k, null.len(), |r, c| eig.eigenvectors[(r, null[c])]);
                let hn = &hs * &n;
                let rhs = &xiv - &hs * &c0;
                if let Ok(p) = hn.pseudo_inverse(1e-12) {
                    cs += &n * (p * rhs);
                }
            }
            let consistent = support
                .iter()
                .enumerate()
                .all(|(j, &i)| signs[i] as f64 * cs[j] >= -1e-12);
            let l1: f64 = cs.iter().map(|v| v.abs()).sum();
            if consistent && l1 <= 1.0 + 1e-9 && (&gs * &cs).amax() <= 1e-9 {
                best = best.min((&xiv - &hs * &cs).norm_squared());
            }
        }
    }
    best
}

/// Smallest `‖a‖₁` with `Σ a_j β_j = u`, by enumerating the basic solutions
/// of the corresponding LP (every `d`-subset of the points). The largest `λ`
/// with `λu ∈ conv{±β_j}` is the reciprocal.
pub fn min_l1_representation(points: ArrayView2<f64>, u: ArrayView1<f64>) -> f64 {
    let (j, d) = points.dim();
    let uv = DVector::from_iterator(d, u.iter().copied());
    let mut best = f64::INFINITY;
    let mut subset: Vec<usize> = (0..d).collect();
    loop {
        let m = DMatrix::from_fn(d, d, |r, c| points[[subset[c], r]]);
        if m.determinant().abs() > 1e-12 {
            if let Some(a) = m.lu().solve(&uv) {
                best = best.min(a.lp_norm(1));
            }
        }
        // next combination
        let mut i = d;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if subset[i] < j - d + i {
                subset[i] += 1;
                for k in i + 1..d {
                    subset[k] = subset[k - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Eigenvalues of a symmetric positive-definite matrix, descending, by power
/// iteration with Hotelling deflation.
pub fn power_iteration_eigenvalues(a: ArrayView2<f64>, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = a.nrows();
    let mut m = a.to_owned();
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let mut v: Array1<f64> = Array1::from_shape_fn(n, |_| rng.random_range(-1.0..1.0));
        v /= v.dot(&v).sqrt();
        let mut lambda = 0.0;
        for _ in 0..20000 {
            let w = m.dot(&v);
            let nw = w.dot(&w).sqrt();
            if nw == 0.0 {
                break;
            }
            let next = &w / nw;
            let new_lambda = next.dot(&m.dot(&next));
            let diff = (&next - &v).iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
            v = next;
            if (new_lambda - lambda).abs() <= 1e-15 * new_lambda.abs() && diff < 1e-12 {
                lambda = new_lambda;
                break;
            }
            lambda = new_lambda;
        }
        out.push(lambda);
        let vv = Array2::from_shape_fn((n, n), |(i, j)| v[i] * v[j]);
        m = &m - &(vv * lambda);
    }
    out
}

/// Central difference of `f` at `x` along every coordinate.
pub fn central_difference(f: impl Fn(ArrayView1<f64>) -> f64, x: ArrayView1<f64>, h: f64) -> Array1<f64> {
    let mut g = Array1::zeros(x.len());
    let mut xp = x.to_owned();
    for i in 0..x.len() {
        let orig = xp[i];
        xp[i] = orig + h;
        let fp = f(xp.view());
        xp[i] = orig - h;
        let fm = f(xp.view());
        xp[i] = orig;
        g[i] = (fp - fm) / (2.0 * h);
    }
    g
}

/// Spearman rank correlation (average ranks for ties).
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&i, &j| v[i].partial_cmp(&v[j]).unwrap());
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            let avg = (i + j) as f64 / 2.0 + 1.0;
            for k in i..=j {
                r[idx[k]] = avg;
            }
            i = j + 1;
        }
        r
    }
    let (ra, rb) = (ranks(a), ranks(b));
    let n = a.len() as f64;
    let ma = ra.iter().sum::<f64>() / n;
    let mb = rb.iter().sum::<f64>() / n;
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va * vb).sqrt()
}
