//! Sparse Non-Gaussian Component Analysis.
//!
//! Estimates the low-dimensional subspace carrying the non-Gaussian part
//! of a density of the form `φ(x)·q(Tx)`: convex projections of gradient
//! moments produce candidate vectors, a rounding ellipsoid of their
//! symmetric hull exposes the subspace, and normality tests pick the axes.

pub mod driver;
pub mod ellipsoid;
pub mod error;
pub mod linalg;
pub mod moments;
pub mod normality;
pub mod projection;
pub mod rng;
pub mod synthetic;
pub mod test_functions;
pub mod types;

pub use driver::{run_iteration, run_sngca, sample_directions, Directions, IterationRecord, SngcaConfig, StopRule};
pub use ellipsoid::{build_projector, mvee_round, principal_axes, Ellipsoid, PrincipalAxes};
pub use error::{Result, SngcaError};
pub use moments::{estimate_moments, MomentPair};
pub use normality::{anderson_darling, classify_axes, dagostino_k2, shapiro_wilk, TestVerdict};
pub use projection::{convex_projection, ProjectionResult};
pub use synthetic::{generate, GeneratedData, ModelKind, ModelSpec};
pub use test_functions::{FamilySelection, TestFamily, TestKind};
pub use types::{max_subspace_cosine, normalize, subspace_error, Dataset, SubspaceEstimate};
