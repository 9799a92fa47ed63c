//! Seeded benchmark models with a two-dimensional non-Gaussian block and
//! Gaussian noise in the remaining coordinates.
//!
//! Before rotation the non-Gaussian block occupies coordinates 0 and 1,
//! each with unit variance. A Haar-random rotation `R` is then applied to
//! rows (`x ↦ Rx`), so the target subspace is spanned by the first two
//! columns of `R`.

use ndarray::{s, Array2};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SngcaError};
use crate::linalg::random_orthogonal;
use crate::rng::derive_rng;
use crate::types::{Dataset, SubspaceEstimate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ModelKind {
    /// Independent coordinates, each `0.5 N(−3,1) + 0.5 N(3,1)`.
    #[serde(rename = "A")]
    GaussMixture,
    /// Isotropic density `∝ exp(−‖x‖)`.
    #[serde(rename = "B")]
    SuperGauss,
    /// Uniform on the unit disk.
    #[serde(rename = "C")]
    UniformDisk,
    /// Laplace coordinate plus a uniform coordinate whose offset depends on it.
    #[serde(rename = "D")]
    LaplaceUniform,
    /// Isotropic 2-d Cauchy, radius truncated at 20.
    #[serde(rename = "E")]
    IsotropicHeavyTail,
}

impl ModelKind {
    pub const ALL: [ModelKind; 5] = [
        ModelKind::GaussMixture,
        ModelKind::SuperGauss,
        ModelKind::UniformDisk,
        ModelKind::LaplaceUniform,
        ModelKind::IsotropicHeavyTail,
    ];

    pub fn letter(self) -> char {
        match self {
            ModelKind::GaussMixture => 'A',
            ModelKind::SuperGauss => 'B',
            ModelKind::UniformDisk => 'C',
            ModelKind::LaplaceUniform => 'D',
            ModelKind::IsotropicHeavyTail => 'E',
        }
    }

    pub fn from_letter(c: char) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.letter() == c.to_ascii_uppercase())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub d: usize,
    pub n: usize,
    /// Noise standard deviations follow `10^{−r}, …, 10^{r}` geometrically.
    #[serde(default)]
    pub noise_r: Option<f64>,
    pub seed: u64,
}

/// Cauchy scale and truncation radius of model E.
const CAUCHY_LAMBDA: f64 = 1.0;
const CAUCHY_TRUNCATION: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct GeneratedData {
    pub data: Dataset,
    pub truth: SubspaceEstimate,
    /// Samples before rotation; the non-Gaussian block is columns 0 and 1.
    pub unrotated: Array2<f64>,
    pub rotation: Array2<f64>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind, d: usize, n: usize, seed: u64) -> Self {
        ModelSpec {
            kind,
            d,
            n,
            noise_r: None,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 3 {
            return Err(SngcaError::InvalidSpec(format!(
                "d = {} but at least 3 dimensions are needed",
                self.d
            )));
        }
        if self.n < 2 {
            return Err(SngcaError::InvalidSpec(format!(
                "N = {} but at least 2 samples are needed",
                self.n
            )));
        }
        if let Some(r) = self.noise_r {
            if !r.is_finite() {
                return Err(SngcaError::InvalidSpec(format!("noise_r = {r}")));
            }
        }
        Ok(())
    }

    /// Standard deviations of the `d − 2` Gaussian coordinates.
    pub fn noise_stds(&self) -> Vec<f64> {
        let g = self.d.saturating_sub(2);
        match self.noise_r {
            None => vec![1.0; g],
            Some(_) if g == 1 => vec![1.0],
            Some(r) => (0..g)
                .map(|k| 10f64.powf(-r + 2.0 * r * k as f64 / (g - 1) as f64))
                .collect(),
        }
    }
}

fn sample_block(kind: ModelKind, rng: &mut ChaCha8Rng) -> [f64; 2] {
    match kind {
        ModelKind::GaussMixture => {
            let scale = 10f64.sqrt().recip();
            let mut draw = || {
                let z: f64 = StandardNormal.sample(rng);
                let shift = if rng.random::<bool>() { 3.0 } else { -3.0 };
                (z + shift) * scale
            };
            [draw(), draw()]
        }
        ModelKind::SuperGauss => {
            // radius density ∝ r·e^{−r}; E[r²] = 6
            let r: f64 = Gamma::new(2.0, 1.0).expect("gamma").sample(rng);
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let scale = 3f64.sqrt().recip();
            [r * theta.cos() * scale, r * theta.sin() * scale]
        }
        ModelKind::UniformDisk => loop {
            let u: f64 = rng.random_range(-1.0..1.0);
            let v: f64 = rng.random_range(-1.0..1.0);
            if u * u + v * v <= 1.0 {
                break [2.0 * u, 2.0 * v];
            }
        },
        ModelKind::LaplaceUniform => {
            let e: f64 = Exp1.sample(rng);
            let lap = if rng.random::<bool>() { e } else { -e };
            let c = if lap.abs() <= std::f64::consts::LN_2 { 0.0 } else { -1.0 };
            let u: f64 = rng.random_range(c..c + 1.0);
            [lap / std::f64::consts::SQRT_2, u * 3f64.sqrt()]
        }
        ModelKind::IsotropicHeavyTail => {
            // inverse CDF of F(r) = 1 − λ/√(λ²+r²) restricted to [0, 20λ]
            let lam = CAUCHY_LAMBDA;
            let rmax = CAUCHY_TRUNCATION * lam;
            let fmax = 1.0 - lam / (lam * lam + rmax * rmax).sqrt();
            let u = rng.random_range(0.0..fmax);
            let t = lam / (1.0 - u);
            let r = (t * t - lam * lam).max(0.0).sqrt();
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            [r * theta.cos(), r * theta.sin()]
        }
    }
}

pub fn generate(spec: &ModelSpec) -> Result<GeneratedData> {
    spec.validate()?;
    let (n, d) = (spec.n, spec.d);
    let mut rng = derive_rng(spec.seed, &[0]);
    let stds = spec.noise_stds();
    let mut x = Array2::<f64>::zeros((n, d));
    for mut row in x.rows_mut() {
        let [a, b] = sample_block(spec.kind, &mut rng);
        row[0] = a;
        row[1] = b;
        for (k, sd) in stds.iter().enumerate() {
            let z: f64 = StandardNormal.sample(&mut rng);
            row[k + 2] = sd * z;
        }
    }
    if spec.kind == ModelKind::IsotropicHeavyTail {
        // the truncated law has no closed-form variance worth using
        for j in 0..2 {
            let mut col = x.column_mut(j);
            let mean = col.sum() / n as f64;
            let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n as f64 - 1.0);
            if var > 0.0 {
                col.mapv_inplace(|v| v / var.sqrt());
            }
        }
    }

    let rotation = random_orthogonal(d, &mut derive_rng(spec.seed, &[1]));
    let rotated = x.dot(&rotation.t());
    let truth = SubspaceEstimate::from_orthonormal(rotation.slice(s![.., 0..2]).to_owned())?;
    Ok(GeneratedData {
        data: Dataset::new(rotated)?,
        truth,
        unrotated: x,
        rotation,
    })
}
