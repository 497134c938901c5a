//! Absolutely compatible pairs of positive contractions in matrix algebras.
//!
//! Two effects `0 ≤ a, b ≤ I` are *absolutely compatible* when
//! `|a − b| + |I − a − b| = I`. This crate checks that identity, splits a
//! compatible pair into its commuting and strict parts, turns a strict pair
//! into its canonical form over a diagonal (abelian) algebra and back, and
//! maps the 2×2 case onto the Bloch ball where compatible pairs sit on
//! spheres internally tangent to the boundary.
//!
//! Module map:
//!
//! - [`hermitian`]: Jacobi eigensolver, functional calculus, support / null /
//!   range projections, polar decomposition, strictness.
//! - [`compat`]: compatibility predicates and the five-block decomposition.
//! - [`m2diag`]: 2×2 block matrices over a diagonal algebra (one block per site).
//! - [`canonical`]: strict unitaries and projections, forward constructions and
//!   [`canonical::canonicalize`].
//! - [`geometry`]: Bloch map, pivotal spheres, and the M₂ pair decomposition.
//! - [`fuzzgen`]: seeded generators for every random instance used in tests
//!   and campaigns.

pub mod canonical;
pub mod compat;
pub mod error;
pub mod fuzzgen;
pub mod geometry;
pub mod hermitian;
pub mod m2diag;
pub mod matrix;

pub use error::{Error, Result};
pub use matrix::CMatrix;
pub use num_complex::Complex64;

use serde::{Deserialize, Serialize};

/// Numerical thresholds shared by every module.
///
/// All values are absolute unless the operation documents a scale factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Max-entry defect allowed for `H = H*`.
    pub herm: f64,
    /// `‖U*U − I‖` for unitaries.
    pub unit: f64,
    /// `‖P² − P‖` for projections.
    pub proj: f64,
    /// Distance from 0 or 1 below which an eigenvalue counts as 0 or 1.
    pub spec: f64,
    /// Reconstruction residual of an eigendecomposition, relative to `max(1, ‖H‖)`.
    pub eig: f64,
    /// Eigenvalues closer than this (times `max(1, ‖H‖)`) form one spectral block.
    pub cluster: f64,
    /// Operator-norm threshold for compatibility, orthogonality and commutation.
    pub compat: f64,
    /// Off-block mass allowed in the five-block decomposition.
    pub block: f64,
    /// Reconstruction residual allowed for canonical forms.
    pub canon: f64,
    /// Geometric residuals on the Bloch ball.
    pub geo: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            herm: 1e-10,
            unit: 1e-10,
            proj: 1e-10,
            spec: 1e-9,
            eig: 1e-10,
            cluster: 1e-8,
            compat: 1e-8,
            block: 1e-8,
            canon: 1e-7,
            geo: 1e-9,
        }
    }
}

impl Tolerances {
    /// Rejects non-positive or non-finite entries.
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("herm", self.herm),
            ("unit", self.unit),
            ("proj", self.proj),
            ("spec", self.spec),
            ("eig", self.eig),
            ("cluster", self.cluster),
            ("compat", self.compat),
            ("block", self.block),
            ("canon", self.canon),
            ("geo", self.geo),
        ];
        for (name, v) in all {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::Shape(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}
