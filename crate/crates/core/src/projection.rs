//! Convex projection of a probe vector onto the ℓ1-bounded, γ-annihilating
//! combinations of gradient moments:
//!
//! ```text
//! min ‖ξ − Σ c_l η̂_l‖₂   s.t.  Σ c_l γ̂_l = 0,  ‖c‖₁ ≤ 1
//! ```
//!
//! The coefficients are split as `c = c⁺ − c⁻` with `c± ≥ 0` and a slack `s`
//! closes the ℓ1 budget, `1ᵀc⁺ + 1ᵀc⁻ + s = 1`. With `w = H(c⁺ − c⁻)` the
//! problem becomes the standard-form QP
//!
//! ```text
//! min ½‖w‖² − ξᵀw   s.t.  w − H(c⁺ − c⁻) = 0,  U(c⁺ − c⁻) = 0,  budget,  x ≥ 0
//! ```
//!
//! where `U` is an orthonormal basis of the row space of `[γ̂_1 … γ̂_L]`. It is
//! solved by a Mehrotra predictor-corrector interior-point method; the Hessian
//! is diagonal after barrier scaling so each Newton step reduces to a dense
//! SPD system of size `d + rank(γ̂) + 1`.

use ndarray::{s, Array1, Array2, ArrayView1, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SngcaError};
use crate::linalg;
use crate::moments::MomentPair;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    pub c_hat: Array1<f64>,
    pub beta_hat: Array1<f64>,
    /// `‖ξ − η̂(ĉ)‖₂`
    pub residual: f64,
    /// `‖γ̂(ĉ)‖∞`
    pub feasibility_gap: f64,
    /// Largest scaled KKT residual (primal, dual, complementarity) at exit.
    pub kkt_residual: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverSettings {
    pub kkt_tol: f64,
    /// Residual still accepted when rounding stalls the iteration short of
    /// `kkt_tol`.
    pub accept_tol: f64,
    /// Feasibility tolerance relative to `max_l ‖γ̂_l‖∞`.
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            kkt_tol: 1e-10,
            accept_tol: 1e-6,
            feas_tol: 1e-7,
            max_iter: 200,
        }
    }
}

/// Euclidean projection onto `{c : ‖c‖₁ ≤ radius}` (sort-based).
pub fn project_l1_ball(v: ArrayView1<f64>, radius: f64) -> Array1<f64> {
    let l1: f64 = v.iter().map(|x| x.abs()).sum();
    if l1 <= radius {
        return v.to_owned();
    }
    let mut mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    mags.sort_unstable_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (k, &u) in mags.iter().enumerate() {
        cumsum += u;
        let t = (cumsum - radius) / (k as f64 + 1.0);
        if u > t {
            theta = t;
        } else {
            break;
        }
    }
    v.mapv(|x| x.signum() * (x.abs() - theta).max(0.0))
}

pub fn convex_projection(xi: ArrayView1<f64>, moments: &[MomentPair]) -> Result<ProjectionResult> {
    convex_projection_with(xi, moments, &SolverSettings::default())
}

pub fn convex_projection_with(
    xi: ArrayView1<f64>,
    moments: &[MomentPair],
    settings: &SolverSettings,
) -> Result<ProjectionResult> {
    let l = moments.len();
    if l == 0 {
        return Err(SngcaError::EmptyData);
    }
    let d = xi.len();
    let mut eta = Array2::<f64>::zeros((d, l));
    let mut gamma = Array2::<f64>::zeros((d, l));
    for (j, m) in moments.iter().enumerate() {
        if m.eta_hat.len() != d || m.gamma_hat.len() != d {
            return Err(SngcaError::DimensionMismatch {
                expected: d,
                found: m.eta_hat.len().max(m.gamma_hat.len()),
            });
        }
        eta.column_mut(j).assign(&m.eta_hat);
        gamma.column_mut(j).assign(&m.gamma_hat);
    }
    let gamma_scale = gamma.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    // orthonormal rows spanning the constraint space
    let u = if gamma_scale > 0.0 {
        linalg::orthonormalize_columns(gamma.t(), 1e-12).reversed_axes()
    } else {
        Array2::zeros((0, l))
    };

    let qp = StandardQp::new(xi, &eta, &u);
    let (x, iterations, kkt) = qp.solve(settings);

    let mut c = &x.slice(s![..l]) - &x.slice(s![l..2 * l]);
    if let Some(p) = polish(xi, &eta, &u, &c) {
        c = p;
    }
    // remove the residual constraint violation exactly, then restore the budget
    if u.nrows() > 0 {
        let viol = u.dot(&c);
        c -= &u.t().dot(&viol);
    }
    let l1 = c.iter().map(|v| v.abs()).sum::<f64>();
    if l1 > 1.0 {
        c /= l1;
    }
    // a stalled iterate is still usable once the refinement proves optimality
    if kkt > settings.accept_tol {
        match active_set(xi, &eta, &u, &c) {
            Some((refined, true)) => c = refined,
            _ => {
                return Err(SngcaError::SolverNotConverged {
                    iterations,
                    gap: kkt,
                })
            }
        }
    }
    let beta_hat = eta.dot(&c);
    let residual = linalg::norm2((&xi - &beta_hat).view());
    let feasibility_gap = gamma.dot(&c).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if feasibility_gap > settings.feas_tol * gamma_scale.max(f64::MIN_POSITIVE) && gamma_scale > 0.0 {
        return Err(SngcaError::SolverNotConverged {
            iterations,
            gap: feasibility_gap,
        });
    }
    Ok(ProjectionResult {
        c_hat: c,
        beta_hat,
        residual,
        feasibility_gap,
        kkt_residual: kkt,
        iterations,
    })
}

fn objective(xi: ArrayView1<f64>, eta: &Array2<f64>, c: &Array1<f64>) -> f64 {
    let r = &xi - &eta.dot(c);
    r.dot(&r)
}

/// Re-solves on the support and signs found by the interior-point method as
/// an equality-constrained least-squares problem, with the ℓ1 budget both
/// tight and free. Interior-point iterates approach degenerate optima only
/// like `√μ`; this recovers them exactly. Tiny coefficients may belong to
/// the support or be numerical residue, so nested supports from several
/// cutoffs are tried. A candidate is used only if it is sign-consistent,
/// feasible and no worse than `c`.
fn polish(
    xi: ArrayView1<f64>,
    eta: &Array2<f64>,
    u: &Array2<f64>,
    c: &Array1<f64>,
) -> Option<Array1<f64>> {
    let cmax = c.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if cmax == 0.0 {
        return None;
    }
    let base = objective(xi, eta, c);
    let mut best: Option<(f64, Array1<f64>)> = None;
    let mut last_support = Vec::new();
    for cut in [1e-6, 1e-5, 1e-4, 1e-3, 1e-2] {
        let support: Vec<usize> = (0..c.len()).filter(|&i| c[i].abs() > cut * cmax).collect();
        if support == last_support {
            continue;
        }
        for cand in face_candidates(xi, eta, u, c, &support) {
            let obj = objective(xi, eta, &cand);
            if obj <= base + 1e-12 && best.as_ref().is_none_or(|(b, _)| obj < *b) {
                best = Some((obj, cand));
            }
        }
        last_support = support;
    }
    best.map(|(_, c)| c)
}

/// Feasible minimizers on the face given by `support` and the signs of `c`.
fn face_candidates(
    xi: ArrayView1<f64>,
    eta: &Array2<f64>,
    u: &Array2<f64>,
    c: &Array1<f64>,
    support: &[usize],
) -> Vec<Array1<f64>> {
    let k = support.len();
    let signs: Vec<f64> = support.iter().map(|&i| c[i].signum()).collect();
    let hs = eta.select(Axis(1), support);
    let us = u.select(Axis(1), support);
    let mut out = Vec::new();
    for budget in [true, false] {
        let na = us.nrows() + usize::from(budget);
        let n = k + na;
        let mut kkt = Array2::<f64>::zeros((n, n));
        kkt.slice_mut(s![..k, ..k]).assign(&hs.t().dot(&hs));
        kkt.slice_mut(s![k..k + us.nrows(), ..k]).assign(&us);
        kkt.slice_mut(s![..k, k..k + us.nrows()]).assign(&us.t());
        let mut rhs = Array1::<f64>::zeros(n);
        rhs.slice_mut(s![..k]).assign(&hs.t().dot(&xi));
        if budget {
            for (i, sg) in signs.iter().enumerate() {
                kkt[[n - 1, i]] = *sg;
                kkt[[i, n - 1]] = *sg;
            }
            rhs[n - 1] = 1.0;
        }
        let Some(sol) = pseudo_solve(&kkt, &rhs) else {
            continue;
        };
        if (0..k).any(|j| sol[j] * signs[j] < 0.0) {
            continue;
        }
        let mut cand = Array1::<f64>::zeros(c.len());
        for (j, &i) in support.iter().enumerate() {
            cand[i] = sol[j];
        }
        let l1: f64 = cand.iter().map(|v| v.abs()).sum();
        let viol = if u.nrows() > 0 { inf_norm(&u.dot(&cand)) } else { 0.0 };
        if l1 <= 1.0 + 1e-12 && viol <= 1e-12 {
            out.push(cand);
        }
    }
    out
}

/// Primal active-set refinement from a feasible `c`, in the split form
/// `v = (c⁺, c⁻, s) ≥ 0` with `U(c⁺ − c⁻) = 0` and `1ᵀc⁺ + 1ᵀc⁻ + s = 1`.
/// Each pass solves the equality-constrained least squares on the free set,
/// steps back to the boundary if that leaves the orthant, and otherwise adds
/// the variable whose reduced gradient is most negative. The flag is set when
/// no such variable remains, which certifies global optimality.
fn active_set(
    xi: ArrayView1<f64>,
    eta: &Array2<f64>,
    u: &Array2<f64>,
    c: &Array1<f64>,
) -> Option<(Array1<f64>, bool)> {
    let (d, l) = eta.dim();
    let nv = 2 * l + 1;
    let r_u = u.nrows();
    let na = r_u + 1;
    let mut hs = Array2::<f64>::zeros((d, nv));
    hs.slice_mut(s![.., ..l]).assign(eta);
    hs.slice_mut(s![.., l..2 * l]).assign(&eta.mapv(|v| -v));
    let mut a = Array2::<f64>::zeros((na, nv));
    a.slice_mut(s![..r_u, ..l]).assign(u);
    a.slice_mut(s![..r_u, l..2 * l]).assign(&u.mapv(|v| -v));
    a.row_mut(r_u).fill(1.0);
    let mut b = Array1::<f64>::zeros(na);
    b[r_u] = 1.0;

    let mut v = Array1::<f64>::zeros(nv);
    for i in 0..l {
        v[i] = c[i].max(0.0);
        v[l + i] = (-c[i]).max(0.0);
    }
    v[2 * l] = (1.0 - c.iter().map(|x| x.abs()).sum::<f64>()).max(0.0);
    let mut free: Vec<usize> = (0..nv).filter(|&i| v[i] > 0.0).collect();
    let hx = hs.t().dot(&xi);
    let tol = 1e-9 * hx.iter().fold(1.0f64, |m, x| m.max(x.abs()));

    let mut certified = false;
    for _ in 0..10 * nv {
        let k = free.len();
        let n = k + na;
        let hf = hs.select(Axis(1), &free);
        let af = a.select(Axis(1), &free);
        let mut kkt = Array2::<f64>::zeros((n, n));
        kkt.slice_mut(s![..k, ..k]).assign(&hf.t().dot(&hf));
        kkt.slice_mut(s![k.., ..k]).assign(&af);
        kkt.slice_mut(s![..k, k..]).assign(&af.t());
        let mut rhs = Array1::<f64>::zeros(n);
        rhs.slice_mut(s![..k]).assign(&hf.t().dot(&xi));
        rhs.slice_mut(s![k..]).assign(&b);
        let sol = pseudo_solve(&kkt, &rhs)?;

        let mut alpha = 1.0f64;
        for (j, &i) in free.iter().enumerate() {
            if sol[j] < 0.0 {
                alpha = alpha.min(v[i] / (v[i] - sol[j]));
            }
        }
        for (j, &i) in free.iter().enumerate() {
            v[i] += alpha * (sol[j] - v[i]);
        }
        if alpha < 1.0 {
            free.retain(|&i| v[i] > 1e-15);
            for i in 0..nv {
                if !free.contains(&i) {
                    v[i] = 0.0;
                }
            }
            continue;
        }

        let resid = &xi - &hs.dot(&v);
        let lambda = sol.slice(s![k..]);
        let grad = hs.t().dot(&resid) - a.t().dot(&lambda);
        let entering = (0..nv)
            .filter(|i| !free.contains(i))
            .map(|i| (i, grad[i]))
            .fold(None, |acc: Option<(usize, f64)>, (i, g)| match acc {
                Some((_, best)) if best >= g => acc,
                _ => Some((i, g)),
            });
        match entering {
            Some((i, g)) if g > tol => free.push(i),
            _ => {
                certified = true;
                break;
            }
        }
    }
    let out = &v.slice(s![..l]) - &v.slice(s![l..2 * l]);
    let feasible = out.iter().map(|x| x.abs()).sum::<f64>() <= 1.0 + 1e-12
        && (r_u == 0 || inf_norm(&u.dot(&out)) <= 1e-12);
    feasible.then_some((out, certified))
}

/// Minimum-norm solution of a symmetric system via its eigendecomposition.
fn pseudo_solve(a: &Array2<f64>, b: &Array1<f64>) -> Option<Array1<f64>> {
    let (vals, vecs) = linalg::symmetric_eigen(a.view()).ok()?;
    let cutoff = 1e-12 * vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let proj = vecs.t().dot(b);
    let scaled = Array1::from_iter(
        vals.iter()
            .zip(proj.iter())
            .map(|(l, p)| if l.abs() > cutoff { p / l } else { 0.0 }),
    );
    let x = vecs.dot(&scaled);
    let resid = inf_norm(&(a.dot(&x) - b));
    (resid <= 1e-9 * (1.0 + inf_norm(b))).then_some(x)
}

/// `min ½‖w‖² − ξᵀw  s.t.  E (x, w) = f,  x ≥ 0` with
/// `x = (c⁺, c⁻, s)` and
///
/// ```text
///     [ −H   H   0 | I ]        [ 0 ]
/// E = [  U  −U   0 | 0 ]    f = [ 0 ]
///     [  1ᵀ  1ᵀ  1 | 0 ]        [ 1 ]
/// ```
struct StandardQp {
    e: Array2<f64>,
    f: Array1<f64>,
    xi: Array1<f64>,
    nx: usize,
    d: usize,
}

impl StandardQp {
    fn new(xi: ArrayView1<f64>, eta: &Array2<f64>, u: &Array2<f64>) -> Self {
        let (d, l) = eta.dim();
        let r = u.nrows();
        let nx = 2 * l + 1;
        let rows = d + r + 1;
        let mut e = Array2::<f64>::zeros((rows, nx + d));
        e.slice_mut(s![..d, ..l]).assign(&eta.mapv(|v| -v));
        e.slice_mut(s![..d, l..2 * l]).assign(eta);
        e.slice_mut(s![..d, nx..]).assign(&Array2::eye(d));
        e.slice_mut(s![d..d + r, ..l]).assign(u);
        e.slice_mut(s![d..d + r, l..2 * l]).assign(&u.mapv(|v| -v));
        e.slice_mut(s![d + r, ..nx]).fill(1.0);
        let mut f = Array1::zeros(rows);
        f[rows - 1] = 1.0;
        StandardQp {
            e,
            f,
            xi: xi.to_owned(),
            nx,
            d,
        }
    }

    /// Returns the best iterate seen as `(x, iterations, kkt)`; the caller
    /// decides whether `kkt` is acceptable.
    fn solve(&self, settings: &SolverSettings) -> (Array1<f64>, usize, f64) {
        let tol = settings.kkt_tol;
        let nx = self.nx;
        let d = self.d;
        let n = nx + d;
        let m = self.e.nrows();

        let mut x = Array1::from_elem(nx, 1.0 / nx as f64);
        let mut z = Array1::from_elem(nx, 1.0);
        let mut w = self.e.slice(s![..d, ..nx]).dot(&x).mapv(|v| -v);
        let mut y = Array1::<f64>::zeros(m);

        let mut best = (f64::INFINITY, x.clone(), 0usize);
        let mut iter = 0;
        while iter < settings.max_iter {
            // dual residual: P v + c − Eᵀy − (z, 0)
            let ety = self.e.t().dot(&y);
            let mut rd = Array1::<f64>::zeros(n);
            for i in 0..nx {
                rd[i] = -ety[i] - z[i];
            }
            for k in 0..d {
                rd[nx + k] = w[k] - self.xi[k] - ety[nx + k];
            }
            let v = concat(&x, &w);
            let rp = self.e.dot(&v) - &self.f;
            let mu = x.dot(&z) / nx as f64;

            let rp_n = inf_norm(&rp);
            let rd_n = inf_norm(&rd);
            let kkt = rp_n.max(rd_n).max(mu);
            if rp_n <= tol && rd_n <= tol && mu <= tol {
                return (x, iter, kkt);
            }
            if kkt < best.0 {
                best = (kkt, x.clone(), iter);
            }
            // complementarity has collapsed; further steps only amplify rounding
            if mu < 1e-6 * tol * tol || iter > best.2 + 10 {
                break;
            }

            // diagonal Hessian of the barrier-scaled system: D = Z/X on x, 1 on w
            let mut hinv = Array1::<f64>::ones(n);
            for i in 0..nx {
                hinv[i] = x[i] / z[i];
            }
            let mut schur = Array2::<f64>::zeros((m, m));
            for a in 0..m {
                for b in a..m {
                    let mut acc = 0.0;
                    for k in 0..n {
                        acc += self.e[[a, k]] * hinv[k] * self.e[[b, k]];
                    }
                    schur[[a, b]] = acc;
                    schur[[b, a]] = acc;
                }
            }
            let Some(chol) = Cholesky::factor(&schur) else {
                break;
            };

            let solve_dir = |rc: &Array1<f64>| -> (Array1<f64>, Array1<f64>, Array1<f64>) {
                // g = −r_d + [X⁻¹ r_c; 0]
                let mut g = rd.mapv(|v| -v);
                for i in 0..nx {
                    g[i] += rc[i] / x[i];
                }
                let hg = &hinv * &g;
                let rhs = -(&rp + &self.e.dot(&hg));
                let mut dy = chol.solve(&rhs);
                // the factor is of S + δI; refine against S itself
                for _ in 0..3 {
                    let r = &rhs - &schur.dot(&dy);
                    dy += &chol.solve(&r);
                }
                let dv = &hinv * &(&g + &self.e.t().dot(&dy));
                let dx = dv.slice(s![..nx]).to_owned();
                let dz = Array1::from_iter((0..nx).map(|i| (rc[i] - z[i] * dx[i]) / x[i]));
                (dv, dy, dz)
            };

            // predictor
            let rc_aff = Array1::from_iter((0..nx).map(|i| -x[i] * z[i]));
            let (dv_a, _, dz_a) = solve_dir(&rc_aff);
            let dx_a = dv_a.slice(s![..nx]).to_owned();
            let a_p = max_step(&x, &dx_a);
            let a_d = max_step(&z, &dz_a);
            let mu_aff = (&x + &dx_a.mapv(|v| v * a_p)).dot(&(&z + &dz_a.mapv(|v| v * a_d))) / nx as f64;
            let sigma = (mu_aff / mu).powi(3).clamp(0.0, 1.0);

            // corrector
            let rc = Array1::from_iter(
                (0..nx).map(|i| -x[i] * z[i] + sigma * mu - dx_a[i] * dz_a[i]),
            );
            let (dv, dy, dz) = solve_dir(&rc);
            let dx = dv.slice(s![..nx]).to_owned();
            let step_p = (0.995 * max_step(&x, &dx)).min(1.0);
            let step_d = (0.995 * max_step(&z, &dz)).min(1.0);

            x.scaled_add(step_p, &dx);
            w.scaled_add(step_p, &dv.slice(s![nx..]));
            y.scaled_add(step_d, &dy);
            z.scaled_add(step_d, &dz);
            iter += 1;
        }
        let (kkt, x, _) = best;
        (x, iter, kkt)
    }
}

fn concat(a: &Array1<f64>, b: &Array1<f64>) -> Array1<f64> {
    ndarray::concatenate(Axis(0), &[a.view(), b.view()]).expect("1-d concat")
}

fn inf_norm(v: &Array1<f64>) -> f64 {
    v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Largest `t ≤ 1/0.995`-ish such that `v + t·dv ≥ 0`; unbounded steps are
/// reported as `f64::INFINITY`.
fn max_step(v: &Array1<f64>, dv: &Array1<f64>) -> f64 {
    let mut t = f64::INFINITY;
    for (a, b) in v.iter().zip(dv.iter()) {
        if *b < 0.0 {
            t = t.min(-a / b);
        }
    }
    t.min(1.0 / 0.995)
}

struct Cholesky {
    l: Array2<f64>,
}

impl Cholesky {
    fn factor(a: &Array2<f64>) -> Option<Self> {
        let n = a.nrows();
        let scale = (0..n).map(|i| a[[i, i]]).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
        let shift = 1e-12 * scale;
        let mut l = Array2::<f64>::zeros((n, n));
        for i in 0..n {
            for j in 0..=i {
                let mut acc = a[[i, j]] + if i == j { shift } else { 0.0 };
                for k in 0..j {
                    acc -= l[[i, k]] * l[[j, k]];
                }
                if i == j {
                    // rank loss from barrier scaling near convergence
                    let piv = if acc > shift { acc } else { shift };
                    if !piv.is_finite() {
                        return None;
                    }
                    l[[i, i]] = piv.sqrt();
                } else {
                    l[[i, j]] = acc / l[[j, j]];
                }
            }
        }
        Some(Cholesky { l })
    }

    fn solve(&self, b: &Array1<f64>) -> Array1<f64> {
        let n = b.len();
        let mut y = b.clone();
        for i in 0..n {
            let mut acc = y[i];
            for k in 0..i {
                acc -= self.l[[i, k]] * y[k];
            }
            y[i] = acc / self.l[[i, i]];
        }
        for i in (0..n).rev() {
            let mut acc = y[i];
            for k in i + 1..n {
                acc -= self.l[[k, i]] * y[k];
            }
            y[i] = acc / self.l[[i, i]];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn active_set_reaches_and_certifies_corner() {
        let xi = array![2.0, 0.0];
        let eta = Array2::<f64>::eye(2);
        let u = Array2::<f64>::zeros((0, 2));
        // start on the wrong face
        let (c, cert) = active_set(xi.view(), &eta, &u, &array![0.0, 0.5]).unwrap();
        assert!(cert);
        assert!((&c - &array![1.0, 0.0]).iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn active_set_respects_constraint() {
        // c₀ = c₁ is forced; the best point on that line within the budget is (½, ½)
        let xi = array![1.0, 1.0];
        let eta = Array2::<f64>::eye(2);
        let u = array![[1.0, -1.0]].mapv(|v: f64| v / 2f64.sqrt());
        let (c, cert) = active_set(xi.view(), &eta, &u, &Array1::zeros(2)).unwrap();
        assert!(cert);
        assert!((&c - &array![0.5, 0.5]).iter().all(|v| v.abs() < 1e-12));
    }
}
