//! 2×2 matrices over a diagonal algebra.
//!
//! An element of `M₂(D)` with `D` the diagonal `m×m` matrices is stored as `m`
//! independent 2×2 complex blocks, one per *site*. The embedding into `n×n`
//! matrices (`n = 2m`) interleaves sites: site `k` occupies coordinates
//! `2k` and `2k + 1`. The "2×2 matrix of diagonal matrices" picture
//! `[[D11, D12], [D21, D22]]` is the same object after the permutation that
//! lists all first coordinates before all second coordinates.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{CMatrix, ONE, ZERO};

/// A single 2×2 complex block `[[e00, e01], [e10, e11]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Block2(pub [[Complex64; 2]; 2]);

impl Block2 {
    pub const ZERO: Self = Self([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Self = Self([[ONE, ZERO], [ZERO, ONE]]);
    /// Pivotal projection `P₀ = diag(0, 1)`.
    pub const P0: Self = Self([[ZERO, ZERO], [ZERO, ONE]]);
    /// Pivotal projection `P₁ = diag(1, 0)`.
    pub const P1: Self = Self([[ONE, ZERO], [ZERO, ZERO]]);

    pub fn new(e00: Complex64, e01: Complex64, e10: Complex64, e11: Complex64) -> Self {
        Self([[e00, e01], [e10, e11]])
    }

    pub fn real(e00: f64, e01: f64, e10: f64, e11: f64) -> Self {
        Self::new(e00.into(), e01.into(), e10.into(), e11.into())
    }

    pub fn diag(d0: f64, d1: f64) -> Self {
        Self::real(d0, 0.0, 0.0, d1)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[i][j]
    }

    pub fn adjoint(&self) -> Self {
        let e = &self.0;
        Self::new(e[0][0].conj(), e[1][0].conj(), e[0][1].conj(), e[1][1].conj())
    }

    pub fn scale(&self, s: f64) -> Self {
        let e = &self.0;
        Self([[e[0][0] * s, e[0][1] * s], [e[1][0] * s, e[1][1] * s]])
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }
}

impl Add for Block2 {
    type Output = Block2;
    fn add(self, r: Block2) -> Block2 {
        let (a, b) = (&self.0, &r.0);
        Block2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Block2 {
    type Output = Block2;
    fn sub(self, r: Block2) -> Block2 {
        self + r.scale(-1.0)
    }
}

impl Mul for Block2 {
    type Output = Block2;
    fn mul(self, r: Block2) -> Block2 {
        let (a, b) = (&self.0, &r.0);
        let e = |i: usize, j: usize| a[i][0] * b[0][j] + a[i][1] * b[1][j];
        Block2([[e(0, 0), e(0, 1)], [e(1, 0), e(1, 1)]])
    }
}

/// An element of `M₂(D)`, one [`Block2`] per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct M2OverDiag {
    sites: Vec<Block2>,
}

impl M2OverDiag {
    pub fn new(sites: Vec<Block2>) -> Result<Self> {
        if sites.is_empty() {
            return Err(Error::Shape("M2OverDiag needs at least one site".into()));
        }
        if sites.iter().flat_map(|b| b.0.iter().flatten()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Shape("site entries must be finite".into()));
        }
        Ok(Self { sites })
    }

    /// Same block at every site.
    pub fn uniform(m: usize, block: Block2) -> Self {
        Self { sites: vec![block; m.max(1)] }
    }

    pub fn sites(&self) -> &[Block2] {
        &self.sites
    }

    pub fn m(&self) -> usize {
        self.sites.len()
    }

    /// Entry operator `(i, j)` as its diagonal: one value per site.
    pub fn entry(&self, i: usize, j: usize) -> Vec<Complex64> {
        self.sites.iter().map(|b| b.get(i, j)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self { sites: self.sites.iter().map(Block2::adjoint).collect() }
    }

    pub fn map(&self, f: impl Fn(&Block2) -> Block2) -> Self {
        Self { sites: self.sites.iter().map(f).collect() }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&Block2, &Block2) -> Block2) -> Result<Self> {
        if self.m() != other.m() {
            return Err(Error::DimensionMismatch(2 * self.m(), 2 * other.m()));
        }
        Ok(Self { sites: self.sites.iter().zip(&other.sites).map(|(a, b)| f(a, b)).collect() })
    }

    /// Site-interleaved `2m × 2m` matrix.
    pub fn embed(&self) -> CMatrix {
        let n = 2 * self.m();
        let mut out = CMatrix::zeros(n);
        for (k, b) in self.sites.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    out[(2 * k + i, 2 * k + j)] = b.get(i, j);
                }
            }
        }
        out
    }

    /// Inverse of [`embed`](Self::embed). Fails if the dimension is odd or if
    /// any entry outside the per-site pattern exceeds `tol` in modulus.
    pub fn extract(x: &CMatrix, tol: f64) -> Result<Self> {
        let n = x.n();
        if !n.is_multiple_of(2) {
            return Err(Error::OddDimension(n));
        }
        let mut stray = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                if i / 2 != j / 2 {
                    stray = stray.max(x[(i, j)].norm());
                }
            }
        }
        if stray > tol {
            return Err(Error::Shape(format!("entry outside the site pattern has modulus {stray:.3e}")));
        }
        let sites = (0..n / 2)
            .map(|k| {
                Block2::new(x[(2 * k, 2 * k)], x[(2 * k, 2 * k + 1)], x[(2 * k + 1, 2 * k)], x[(2 * k + 1, 2 * k + 1)])
            })
            .collect();
        Ok(Self { sites })
    }

    /// The block-layout picture `[[D11, D12], [D21, D22]]`: first coordinates
    /// of every site, then second coordinates.
    pub fn to_block_layout(&self) -> CMatrix {
        let m = self.m();
        let mut out = CMatrix::zeros(2 * m);
        for (k, b) in self.sites.iter().enumerate() {
            for i in 0..2 {
                for j in 0..2 {
                    out[(i * m + k, j * m + k)] = b.get(i, j);
                }
            }
        }
        out
    }

    /// Largest per-site entry deviation between two elements.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.sites.iter().zip(&other.sites).map(|(a, b)| (*a - *b).max_abs()).fold(0.0, f64::max)
    }
}
