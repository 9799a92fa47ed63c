//! Smooth bounded test functions `f(x, ω)` and their gradients in `x`.
//!
//! * hyperbolic tangent: `tanh(ωᵀx) · exp(−α‖x‖²/2)`
//! * asymmetric Gauss: `[1 + (ωᵀx)²]⁻¹ · exp(ωᵀx − α‖x‖²/2)`

use ndarray::{Array1, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SngcaError};

/// Damping exponent used unless configured otherwise. On unit-variance data
/// in d = 10 the factor `e^{−α‖x‖²/2}` is about `e^{−5α}` at a typical
/// sample, so larger values suppress most of the signal.
pub const DEFAULT_ALPHA: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestKind {
    HyperbolicTangent,
    AsymmetricGauss,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFamily {
    pub kind: TestKind,
    /// Gaussian damping exponent, strictly positive.
    pub alpha: f64,
}

impl TestFamily {
    pub fn new(kind: TestKind, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(SngcaError::InvalidConfig(format!(
                "test-function damping must be positive, got {alpha}"
            )));
        }
        Ok(TestFamily { kind, alpha })
    }

    pub fn tanh() -> Self {
        TestFamily {
            kind: TestKind::HyperbolicTangent,
            alpha: DEFAULT_ALPHA,
        }
    }

    pub fn asymmetric_gauss() -> Self {
        TestFamily {
            kind: TestKind::AsymmetricGauss,
            alpha: DEFAULT_ALPHA,
        }
    }

    /// `(f, ∇ₓf)` evaluated together; `omega` is assumed unit length.
    pub(crate) fn value_and_grad_unchecked(
        &self,
        x: ArrayView1<f64>,
        omega: ArrayView1<f64>,
        grad: &mut [f64],
    ) -> f64 {
        let s = omega.dot(&x);
        let r2 = x.dot(&x);
        match self.kind {
            TestKind::HyperbolicTangent => {
                let damp = (-0.5 * self.alpha * r2).exp();
                let th = s.tanh();
                let sech2 = 1.0 - th * th;
                for ((g, &w), &xi) in grad.iter_mut().zip(omega.iter()).zip(x.iter()) {
                    *g = (sech2 * w - self.alpha * xi * th) * damp;
                }
                th * damp
            }
            TestKind::AsymmetricGauss => {
                let e = (s - 0.5 * self.alpha * r2).exp();
                let q = 1.0 / (1.0 + s * s);
                let cw = e * (q - 2.0 * s * q * q);
                let cx = -e * q * self.alpha;
                for ((g, &w), &xi) in grad.iter_mut().zip(omega.iter()).zip(x.iter()) {
                    *g = cw * w + cx * xi;
                }
                q * e
            }
        }
    }

    pub fn eval(&self, x: ArrayView1<f64>, omega: ArrayView1<f64>) -> Result<f64> {
        check_unit(omega)?;
        let s = omega.dot(&x);
        let r2 = x.dot(&x);
        Ok(match self.kind {
            TestKind::HyperbolicTangent => s.tanh() * (-0.5 * self.alpha * r2).exp(),
            TestKind::AsymmetricGauss => (s - 0.5 * self.alpha * r2).exp() / (1.0 + s * s),
        })
    }

    pub fn grad_x(&self, x: ArrayView1<f64>, omega: ArrayView1<f64>) -> Result<Array1<f64>> {
        check_unit(omega)?;
        if x.len() != omega.len() {
            return Err(SngcaError::DimensionMismatch {
                expected: omega.len(),
                found: x.len(),
            });
        }
        let mut g = vec![0.0; x.len()];
        self.value_and_grad_unchecked(x, omega, &mut g);
        Ok(Array1::from(g))
    }
}

fn check_unit(omega: ArrayView1<f64>) -> Result<()> {
    let n = omega.dot(&omega).sqrt();
    if (n - 1.0).abs() > 1e-10 {
        return Err(SngcaError::NonUnitDirection(n));
    }
    Ok(())
}

/// How test functions are assigned across the index `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilySelection {
    /// Every test function uses the tanh family.
    Tanh,
    /// Alternates tanh (even `l`) and asymmetric Gauss (odd `l`).
    Mixed,
}

impl FamilySelection {
    pub fn family_for(&self, l: usize, alpha: f64) -> TestFamily {
        let kind = match self {
            FamilySelection::Tanh => TestKind::HyperbolicTangent,
            FamilySelection::Mixed if l % 2 == 0 => TestKind::HyperbolicTangent,
            FamilySelection::Mixed => TestKind::AsymmetricGauss,
        };
        TestFamily { kind, alpha }
    }
}
