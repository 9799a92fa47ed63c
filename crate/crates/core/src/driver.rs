//! The iterative SNGCA procedure: probe sampling, convex projection,
//! ellipsoid rounding, axis classification and structural adaptation.
//!
//! All estimation runs on componentwise-normalized data, and estimates are
//! reported in normalized coordinates. A ground-truth subspace given in raw
//! coordinates is mapped with `diag(col_std)` before comparison, which
//! makes the error invariant to positive rescaling of the raw columns.

use std::time::Instant;

use ndarray::{Array1, Array2, Array3, ArrayView2, Axis};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ellipsoid::{build_projector, mvee_round, principal_axes, Ellipsoid, PrincipalAxes};
use crate::error::{Result, SngcaError};
use crate::moments::estimate_moments_with;
use crate::normality::classify_axes;
use crate::projection::convex_projection;
use crate::rng::derive_rng;
use crate::test_functions::{FamilySelection, TestFamily, DEFAULT_ALPHA};
use crate::types::{max_subspace_cosine, normalize, subspace_error, Dataset, SubspaceEstimate};

/// When to stop iterating.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Relative-improvement rule with `delta_stop`, capped at `max_iter`.
    Auto,
    /// Always run `max_iter` iterations.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SngcaConfig {
    /// Probe count `J`.
    pub j: usize,
    /// Test functions per probe `L`.
    pub l: usize,
    pub max_iter: usize,
    pub delta_stop: f64,
    pub c_mvee: f64,
    /// Significance level of the normality tests.
    pub alpha: f64,
    pub m_hint: Option<usize>,
    pub seed: u64,
    pub family: FamilySelection,
    /// Gaussian damping `α` of the test functions.
    pub damping: f64,
    pub stop_rule: StopRule,
}

impl SngcaConfig {
    /// Defaults for dimension `d`: `J = 7d`, `L = 6d`, `⌈3 ln d⌉` iterations.
    pub fn for_dim(d: usize) -> Self {
        SngcaConfig {
            j: 7 * d,
            l: 6 * d,
            max_iter: default_max_iter(d),
            delta_stop: 0.05,
            c_mvee: 2.0,
            alpha: 0.05,
            m_hint: None,
            seed: 0,
            family: FamilySelection::Tanh,
            damping: DEFAULT_ALPHA,
            stop_rule: StopRule::Auto,
        }
    }

    pub fn validate(&self, d: usize) -> Result<()> {
        let bad = |msg: String| Err(SngcaError::InvalidConfig(msg));
        if self.j == 0 || self.l == 0 {
            return bad(format!("J = {} and L = {} must be positive", self.j, self.l));
        }
        if self.max_iter == 0 {
            return bad("max_iter must be at least 1".into());
        }
        if !(self.delta_stop > 0.0 && self.delta_stop < 1.0) {
            return bad(format!("delta_stop = {} must lie in (0, 1)", self.delta_stop));
        }
        if !(self.c_mvee > 1.0) {
            return bad(format!("C = {} must exceed 1", self.c_mvee));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha = {} must lie in (0, 1)", self.alpha));
        }
        if !(self.damping > 0.0 && self.damping.is_finite()) {
            return bad(format!("damping = {} must be positive", self.damping));
        }
        if let Some(m) = self.m_hint {
            if m == 0 || m > d {
                return Err(SngcaError::InvalidRank { m, d });
            }
        }
        Ok(())
    }
}

pub fn default_max_iter(d: usize) -> usize {
    ((3.0 * (d as f64).ln()).ceil() as usize).max(1)
}

/// Probe vectors `ξ_j` (rows of `xis`) and per-probe test directions
/// `ω_jl` (`omegas[[j, l, ..]]`).
#[derive(Debug, Clone, PartialEq)]
pub struct Directions {
    pub xis: Array2<f64>,
    pub omegas: Array3<f64>,
    /// Number of leading probes drawn from the previous estimate.
    pub adapted_probes: usize,
    /// Number of leading ω rows per probe drawn from the previous estimate.
    pub adapted_omegas: usize,
}

fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> Array1<f64> {
    loop {
        let v: Array1<f64> = Array1::from_shape_fn(d, |_| rng.random_range(-1.0..=1.0));
        let n = v.dot(&v).sqrt();
        if n > 1e-12 {
            return v / n;
        }
    }
}

fn adapted_unit(basis: ArrayView2<f64>, rng: &mut ChaCha8Rng) -> Array1<f64> {
    loop {
        let z = Array1::from_shape_fn(basis.ncols(), |_| rng.random_range(-1.0..=1.0));
        let v = basis.dot(&z);
        let n = v.dot(&v).sqrt();
        if n > 1e-12 {
            return v / n;
        }
    }
}

/// Draws the directions for iteration `k` (1-based). From `k = 2` on, the
/// first `min(kd, J − d)` probes and `min(kd, L − d)` ω rows of every probe
/// are random combinations of the previous basis.
pub fn sample_directions(
    k: usize,
    prev: Option<&SubspaceEstimate>,
    cfg: &SngcaConfig,
    d: usize,
    rng: &mut ChaCha8Rng,
) -> Directions {
    let basis = prev.filter(|p| k > 1 && p.m() > 0).map(|p| p.basis());
    let (n1, n2) = match basis {
        Some(_) => (
            (k * d).min(cfg.j.saturating_sub(d)),
            (k * d).min(cfg.l.saturating_sub(d)),
        ),
        None => (0, 0),
    };
    let draw = |adapted: bool, rng: &mut ChaCha8Rng| match (adapted, basis) {
        (true, Some(b)) => adapted_unit(b, rng),
        _ => random_unit(d, rng),
    };

    let mut xis = Array2::zeros((cfg.j, d));
    for (j, mut row) in xis.rows_mut().into_iter().enumerate() {
        row.assign(&draw(j < n1, rng));
    }
    let mut omegas = Array3::zeros((cfg.j, cfg.l, d));
    for mut probe in omegas.outer_iter_mut() {
        for (l, mut row) in probe.rows_mut().into_iter().enumerate() {
            row.assign(&draw(l < n2, rng));
        }
    }
    Directions {
        xis,
        omegas,
        adapted_probes: n1,
        adapted_omegas: n2,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    /// One `β̂_j` per row.
    pub betas: Array2<f64>,
    pub ellipsoid: Ellipsoid,
    pub axes: PrincipalAxes,
    /// Non-Gaussian verdict per axis, in eigenvalue order.
    pub axes_flags: Vec<bool>,
    pub estimate: SubspaceEstimate,
    pub error_vs_truth: Option<f64>,
    pub cosine_vs_previous: Option<f64>,
    pub adapted_probes: usize,
    pub wall_ms: f64,
}

fn families(cfg: &SngcaConfig) -> Vec<TestFamily> {
    (0..cfg.l)
        .map(|l| cfg.family.family_for(l, cfg.damping))
        .collect()
}

/// One pass of the procedure on normalized `data`. The returned record has
/// `iteration = 0` and no comparisons; [`run_sngca`] fills those in.
pub fn run_iteration(
    data: &Dataset,
    dirs: &Directions,
    cfg: &SngcaConfig,
    rng: &mut ChaCha8Rng,
) -> Result<IterationRecord> {
    let start = Instant::now();
    if !data.is_normalized() {
        return Err(SngcaError::InvalidConfig(
            "run_iteration expects normalized data".into(),
        ));
    }
    let d = data.dim();
    if dirs.xis.ncols() != d || dirs.omegas.dim().2 != d {
        return Err(SngcaError::DimensionMismatch {
            expected: d,
            found: dirs.xis.ncols(),
        });
    }
    let samples = data.samples();
    let fams = families(cfg);
    let betas: Vec<Array1<f64>> = (0..dirs.xis.nrows())
        .into_par_iter()
        .map(|j| {
            let omegas = dirs.omegas.index_axis(Axis(0), j);
            let moments = estimate_moments_with(samples, &fams[..omegas.nrows()], omegas)?;
            Ok(convex_projection(dirs.xis.row(j), &moments)?.beta_hat)
        })
        .collect::<Result<_>>()?;
    let mut beta_mat = Array2::zeros((betas.len(), d));
    for (mut row, b) in beta_mat.rows_mut().into_iter().zip(&betas) {
        row.assign(b);
    }

    let ellipsoid = mvee_round(beta_mat.view(), cfg.c_mvee)?;
    let axes = principal_axes(&ellipsoid)?;
    let axes_flags = classify_axes(samples, axes.eigenvectors.view(), cfg.alpha, rng)?;
    let estimate = match cfg.m_hint {
        Some(m) => build_projector(&axes, m)?,
        None => {
            let cols: Vec<usize> = (0..d).filter(|&i| axes_flags[i]).collect();
            if cols.is_empty() {
                SubspaceEstimate::empty(d)
            } else {
                SubspaceEstimate::from_span(axes.eigenvectors.select(Axis(1), &cols).view())
            }
        }
    };
    Ok(IterationRecord {
        iteration: 0,
        betas: beta_mat,
        ellipsoid,
        axes,
        axes_flags,
        estimate,
        error_vs_truth: None,
        cosine_vs_previous: None,
        adapted_probes: dirs.adapted_probes,
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Maps a raw-coordinate subspace into the normalized frame of `data`.
pub fn truth_in_normalized_frame(
    truth: &SubspaceEstimate,
    data: &Dataset,
) -> Result<SubspaceEstimate> {
    truth.scale_rows(data.col_std().view())
}

/// Maps an estimate from the normalized frame back to raw coordinates.
pub fn estimate_in_raw_frame(
    estimate: &SubspaceEstimate,
    data: &Dataset,
) -> Result<SubspaceEstimate> {
    let inv = data.col_std().mapv(|s| 1.0 / s);
    estimate.scale_rows(inv.view())
}

fn should_stop(records: &[IterationRecord], delta: f64) -> bool {
    let [.., prev, cur] = records else {
        return false;
    };
    if let (Some(e0), Some(e1)) = (prev.error_vs_truth, cur.error_vs_truth) {
        return e0 <= 0.0 || e0 - e1 < delta * e0;
    }
    let gap = |r: &IterationRecord| r.cosine_vs_previous.map_or(1.0, |c| 1.0 - c);
    gap(cur) <= delta * gap(prev)
}

/// Runs the full procedure. Raw data are normalized first; `truth`, if
/// given, is in raw coordinates.
pub fn run_sngca(
    data: &Dataset,
    cfg: &SngcaConfig,
    truth: Option<&SubspaceEstimate>,
) -> Result<Vec<IterationRecord>> {
    let d = data.dim();
    cfg.validate(d)?;
    let normalized;
    let data = if data.is_normalized() {
        data
    } else {
        normalized = normalize(data)?;
        &normalized
    };
    let truth = truth
        .map(|t| {
            if t.ambient_dim() != d {
                return Err(SngcaError::DimensionMismatch {
                    expected: d,
                    found: t.ambient_dim(),
                });
            }
            truth_in_normalized_frame(t, data)
        })
        .transpose()?;

    let mut records: Vec<IterationRecord> = Vec::with_capacity(cfg.max_iter);
    for k in 1..=cfg.max_iter {
        let prev = records.last().map(|r| &r.estimate);
        let mut attempt = 0u64;
        let mut record = loop {
            let mut dir_rng = derive_rng(cfg.seed, &[1, k as u64, attempt]);
            let mut test_rng = derive_rng(cfg.seed, &[2, k as u64, attempt]);
            let dirs = sample_directions(k, prev, cfg, d, &mut dir_rng);
            match run_iteration(data, &dirs, cfg, &mut test_rng) {
                Err(SngcaError::DegenerateSpan) if attempt == 0 => attempt += 1,
                other => break other?,
            }
        };
        record.iteration = k;
        if let Some(t) = &truth {
            record.error_vs_truth = Some(subspace_error(&record.estimate, t)?);
        }
        if let Some(p) = prev {
            record.cosine_vs_previous =
                Some(max_subspace_cosine(record.estimate.basis(), p.basis())?);
        }
        records.push(record);
        if cfg.stop_rule == StopRule::Auto && should_stop(&records, cfg.delta_stop) {
            break;
        }
    }
    Ok(records)
}

/// Share of each row's squared norm lying in `truth`.
pub fn in_span_fraction(vectors: ArrayView2<f64>, truth: &SubspaceEstimate) -> Array1<f64> {
    let p = truth.projector();
    vectors
        .rows()
        .into_iter()
        .map(|v| {
            let nv = v.dot(&v);
            if nv == 0.0 {
                0.0
            } else {
                let pv = p.dot(&v);
                pv.dot(&pv) / nv
            }
        })
        .collect()
}
