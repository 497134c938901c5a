//! Canonical form of a strict absolutely compatible pair.
//!
//! Every strict compatible pair `(a, b)` on `ℂⁿ` (`n = 2m`) is unitarily
//! equivalent to a direct sum of `m` two-dimensional sites, where site `k`
//! carries
//!
//! ```text
//! A_k = (1 − x_k) P₀ + x_k P_k        B_k = (1 − x_k) P₀ + x_k (I − P_k)
//! ```
//!
//! with `P₀ = diag(0, 1)`, `x_k ∈ (0, 1)` and `P_k` a rank-one projection
//! whose diagonal avoids 0 and 1 (a *strict projection*). Such projections are
//! `[[a₀², w a₀ s], [w̄ a₀ s, s²]]` with `s = (1 − a₀²)^{1/2}`, `|w| = 1`.
//!
//! [`canonical_pair`] builds a pair from these parameters and
//! [`canonicalize`] recovers them (plus the conjugating unitary) from an
//! arbitrary strict compatible pair.

use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compat::is_abs_compatible;
use crate::error::{Error, Result};
use crate::hermitian::{
    abs_op, is_strict, jordan_product, op_norm, polar_unitary, unitarity_defect, Effect, Hermitian, Projection, Unitary,
};
use crate::m2diag::{Block2, M2OverDiag};
use crate::matrix::{CMatrix, ZERO};
use crate::Tolerances;

fn strict_scalar(v: f64, tol: &Tolerances) -> bool {
    v > tol.spec && v < 1.0 - tol.spec
}

fn unimodular(w: Complex64, tol: &Tolerances) -> bool {
    (w.norm() - 1.0).abs() <= tol.unit
}

/// Parameters `(a₀, w)` of a strict projection, one pair per site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictProjectionParams {
    pub a0: Vec<f64>,
    pub w: Vec<Complex64>,
}

impl StrictProjectionParams {
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        if self.a0.is_empty() || self.a0.len() != self.w.len() {
            return Err(Error::NotStrictParams(format!(
                "need matching non-empty a0 and w (got {} and {})",
                self.a0.len(),
                self.w.len()
            )));
        }
        for (k, (&a, &w)) in self.a0.iter().zip(&self.w).enumerate() {
            if !strict_scalar(a, tol) {
                return Err(Error::NotStrictParams(format!("a0[{k}] = {a} not in (0, 1)")));
            }
            if !unimodular(w, tol) {
                return Err(Error::NotStrictParams(format!("|w[{k}]| = {} is not 1", w.norm())));
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.a0.len()
    }
}

/// Parameters `(a₀, w₁, w₂, w₃)` of a strict unitary, one tuple per site.
///
/// The unitary is `[[w₁ a₀, w₂ s], [w₃ s, −w̄₁ w₂ w₃ a₀]]` with
/// `s = (1 − a₀²)^{1/2}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StrictUnitaryParams {
    pub a0: Vec<f64>,
    pub w1: Vec<Complex64>,
    pub w2: Vec<Complex64>,
    pub w3: Vec<Complex64>,
}

impl StrictUnitaryParams {
    pub fn validate(&self, tol: &Tolerances) -> Result<()> {
        let m = self.a0.len();
        if m == 0 || self.w1.len() != m || self.w2.len() != m || self.w3.len() != m {
            return Err(Error::NotStrictParams("parameter lists must be non-empty and equally long".into()));
        }
        for k in 0..m {
            if !strict_scalar(self.a0[k], tol) {
                return Err(Error::NotStrictParams(format!("a0[{k}] = {} not in (0, 1)", self.a0[k])));
            }
            for (name, w) in [("w1", self.w1[k]), ("w2", self.w2[k]), ("w3", self.w3[k])] {
                if !unimodular(w, tol) {
                    return Err(Error::NotStrictParams(format!("|{name}[{k}]| = {} is not 1", w.norm())));
                }
            }
        }
        Ok(())
    }
}

pub fn strict_unitary_from_params(q: &StrictUnitaryParams, tol: &Tolerances) -> Result<M2OverDiag> {
    q.validate(tol)?;
    let sites = (0..q.a0.len())
        .map(|k| {
            let a0 = q.a0[k];
            let s = (1.0 - a0 * a0).sqrt();
            let (w1, w2, w3) = (q.w1[k], q.w2[k], q.w3[k]);
            Block2::new(w1 * a0, w2 * s, w3 * s, -(w1.conj() * w2 * w3) * a0)
        })
        .collect();
    M2OverDiag::new(sites)
}

fn ensure_unitary(u: &M2OverDiag, tol: &Tolerances) -> Result<()> {
    let defect = unitarity_defect(&u.embed())?;
    if defect > tol.unit {
        return Err(Error::NotUnitary(defect));
    }
    Ok(())
}

/// All four entry operators strict, i.e. every entry modulus in `(0, 1)`.
pub fn is_strict_unitary(u: &M2OverDiag, tol: &Tolerances) -> Result<bool> {
    ensure_unitary(u, tol)?;
    Ok(u.sites().iter().all(|b| b.0.iter().flatten().all(|z| strict_scalar(z.norm(), tol))))
}

/// Reads `(a₀, w₁, w₂, w₃)` back off a strict unitary.
pub fn strict_unitary_params(u: &M2OverDiag, tol: &Tolerances) -> Result<StrictUnitaryParams> {
    if !is_strict_unitary(u, tol)? {
        return Err(Error::NotStrictUnitary);
    }
    let phase = |z: Complex64| z / z.norm();
    let sites = u.sites();
    Ok(StrictUnitaryParams {
        a0: sites.iter().map(|b| b.get(0, 0).norm()).collect(),
        w1: sites.iter().map(|b| phase(b.get(0, 0))).collect(),
        w2: sites.iter().map(|b| phase(b.get(0, 1))).collect(),
        w3: sites.iter().map(|b| phase(b.get(1, 0))).collect(),
    })
}

fn projection_block(a0: f64, w: Complex64) -> Block2 {
    let s = (1.0 - a0 * a0).sqrt();
    let off = w * (a0 * s);
    Block2::new((a0 * a0).into(), off, off.conj(), (1.0 - a0 * a0).into())
}

pub fn strict_projection_from_params(q: &StrictProjectionParams, tol: &Tolerances) -> Result<M2OverDiag> {
    q.validate(tol)?;
    M2OverDiag::new(q.a0.iter().zip(&q.w).map(|(&a, &w)| projection_block(a, w)).collect())
}

fn ensure_projection(p: &M2OverDiag, tol: &Tolerances) -> Result<()> {
    match Projection::new(p.embed(), tol) {
        Ok(_) => Ok(()),
        Err(Error::NotHermitian(d)) => Err(Error::NotProjection(d)),
        Err(e) => Err(e),
    }
}

/// `(1,1)` entry strict and `(1,1) + (2,2) = 1` at every site.
pub fn is_strict_projection(p: &M2OverDiag, tol: &Tolerances) -> Result<bool> {
    ensure_projection(p, tol)?;
    Ok(p.sites().iter().all(|b| {
        let d0 = b.get(0, 0).re;
        let d1 = b.get(1, 1).re;
        strict_scalar(d0, tol) && (d0 + d1 - 1.0).abs() <= tol.proj
    }))
}

/// Reads `(a₀, w)` back off a strict projection.
pub fn strict_projection_params(p: &M2OverDiag, tol: &Tolerances) -> Result<StrictProjectionParams> {
    if !is_strict_projection(p, tol)? {
        return Err(Error::NotStrictProjection);
    }
    let sites = p.sites();
    Ok(StrictProjectionParams {
        a0: sites.iter().map(|b| b.get(0, 0).re.sqrt()).collect(),
        w: sites
            .iter()
            .map(|b| {
                let z = b.get(0, 1);
                z / z.norm()
            })
            .collect(),
    })
}

/// `(P, P′)` built from the first and second rows of a strict unitary:
/// `P_ij = ū_{1i} u_{1j}`, `P′_ij = ū_{2i} u_{2j}`.
pub fn projection_pair_from_unitary(u: &M2OverDiag, tol: &Tolerances) -> Result<(M2OverDiag, M2OverDiag)> {
    if !is_strict_unitary(u, tol)? {
        return Err(Error::NotStrictUnitary);
    }
    let row_outer = |b: &Block2, r: usize| {
        let (x, y) = (b.get(r, 0), b.get(r, 1));
        Block2::new(x.conj() * x, x.conj() * y, y.conj() * x, y.conj() * y)
    };
    Ok((u.map(|b| row_outer(b, 0)), u.map(|b| row_outer(b, 1))))
}

/// Strict unitary `U` with `P = U* P₀ U`:
/// `U = [[s, −w a₀], [a₀, w s]]` per site.
pub fn conjugate_to_pivot(p: &M2OverDiag, tol: &Tolerances) -> Result<M2OverDiag> {
    let params = strict_projection_params(p, tol)?;
    Ok(pivot_unitary(&params))
}

fn pivot_unitary(params: &StrictProjectionParams) -> M2OverDiag {
    let sites = params
        .a0
        .iter()
        .zip(&params.w)
        .map(|(&a0, &w)| {
            let s = (1.0 - a0 * a0).sqrt();
            Block2::new(s.into(), -w * a0, a0.into(), w * s)
        })
        .collect();
    M2OverDiag::new(sites).expect("finite parameters give finite sites")
}

/// Lifts a commuting strict pair on `ℂⁿ` to the compatible pair
///
/// ```text
/// a₁ = [[a², ab], [ab, I − a²]]     b₁ = [[b², −ab], [−ab, I − b²]]
/// ```
///
/// on `ℂⁿ ⊕ ℂⁿ` (block layout: the first `n` coordinates, then the next `n`).
/// Requires `a`, `b` strict and commuting with `a² + b² ≤ I` strict.
pub fn commuting_pair_dilation(a: &Effect, b: &Effect, tol: &Tolerances) -> Result<(Effect, Effect)> {
    a.matrix().ensure_same_dim(b.matrix())?;
    let comm = op_norm(&a.matrix().commutator(b.matrix()))?;
    if comm > tol.compat {
        return Err(Error::NotCommuting(comm));
    }
    for (name, x) in [("a", a), ("b", b)] {
        let r = is_strict(x.matrix(), tol)?;
        if !r.strict {
            return Err(Error::NotStrict(format!(
                "{name} has spectrum [{:.6e}, {:.6e}]",
                r.min_modulus, r.max_modulus
            )));
        }
    }
    let a2 = a.matrix() * a.matrix();
    let b2 = b.matrix() * b.matrix();
    let sum = Hermitian::from_parts(&(&a2 + &b2));
    let top = sum.eig()?.max();
    if top > 1.0 + tol.spec {
        return Err(Error::SumExceedsOne(top));
    }
    let r = is_strict(sum.matrix(), tol)?;
    if !r.strict {
        return Err(Error::NotStrict(format!("a² + b² has spectrum [{:.6e}, {:.6e}]", r.min_modulus, r.max_modulus)));
    }

    let n = a.n();
    let id = CMatrix::identity(n);
    let ab = jordan_product(a.hermitian(), b.hermitian())?.into_matrix();
    let assemble = |tl: &CMatrix, tr: &CMatrix, br: &CMatrix| {
        CMatrix::from_fn(2 * n, |i, j| match (i < n, j < n) {
            (true, true) => tl[(i, j)],
            (true, false) => tr[(i, j - n)],
            (false, true) => tr[(i - n, j)],
            (false, false) => br[(i - n, j - n)],
        })
    };
    let a1 = assemble(&a2, &ab, &(&id - &a2));
    let b1 = assemble(&b2, &(-&ab), &(&id - &b2));
    Ok((Effect::new(a1, tol)?, Effect::new(b1, tol)?))
}

/// Per-site blocks `(A_k, B_k)` of the canonical pair.
pub fn canonical_pair_sites(x0: &[f64], p: &M2OverDiag) -> Result<(M2OverDiag, M2OverDiag)> {
    if x0.len() != p.m() {
        return Err(Error::DimensionMismatch(2 * x0.len(), 2 * p.m()));
    }
    let a =
        M2OverDiag::new(p.sites().iter().zip(x0).map(|(pk, &x)| Block2::P0.scale(1.0 - x) + pk.scale(x)).collect())?;
    let b = M2OverDiag::new(
        p.sites()
            .iter()
            .zip(x0)
            .map(|(pk, &x)| Block2::P0.scale(1.0 - x) + (Block2::IDENTITY - *pk).scale(x))
            .collect(),
    )?;
    Ok((a, b))
}

/// `A = ((1 − x₀) ⊗ I₂) P₀ + (x₀ ⊗ I₂) P` and the same with `P′ = I − P`,
/// embedded site-interleaved. Both outputs are strict and compatible.
pub fn canonical_pair(x0: &[f64], p: &StrictProjectionParams, tol: &Tolerances) -> Result<(Effect, Effect)> {
    if x0.len() != p.m() {
        return Err(Error::NotStrictParams(format!("x0 has {} sites but P has {}", x0.len(), p.m())));
    }
    for (k, &x) in x0.iter().enumerate() {
        if !strict_scalar(x, tol) {
            return Err(Error::NotStrictParams(format!("x0[{k}] = {x} not in (0, 1)")));
        }
    }
    let proj = strict_projection_from_params(p, tol)?;
    let (a, b) = canonical_pair_sites(x0, &proj)?;
    Ok((Effect::new(a.embed(), tol)?, Effect::new(b.embed(), tol)?))
}

/// Result of [`canonicalize`]: `a = U₀ · embed(A) · U₀*` and likewise for `b`,
/// with `(A, B)` the canonical pair of `(x₀, P)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalForm {
    pub u0: Unitary,
    pub x0: Vec<f64>,
    pub p: StrictProjectionParams,
    /// `max(‖a − a_rec‖, ‖b − b_rec‖)` measured when the form was computed.
    pub residual: f64,
}

impl CanonicalForm {
    pub fn m(&self) -> usize {
        self.x0.len()
    }

    /// Canonical pair over the diagonal algebra, before conjugation by `U₀`.
    pub fn sites(&self) -> (M2OverDiag, M2OverDiag) {
        let proj = M2OverDiag::new(self.p.a0.iter().zip(&self.p.w).map(|(&a, &w)| projection_block(a, w)).collect())
            .expect("finite parameters");
        canonical_pair_sites(&self.x0, &proj).expect("matching site counts")
    }

    pub fn reconstruct(&self) -> (CMatrix, CMatrix) {
        let (a, b) = self.sites();
        (self.u0.conjugate(&a.embed()), self.u0.conjugate(&b.embed()))
    }

    /// Largest operator-norm reconstruction error against `(a, b)`.
    pub fn residual_against(&self, a: &CMatrix, b: &CMatrix) -> Result<f64> {
        let (ra, rb) = self.reconstruct();
        Ok(op_norm(&(a - &ra))?.max(op_norm(&(b - &rb))?))
    }
}

#[derive(Serialize, Deserialize)]
struct CanonicalFormJson {
    m: usize,
    x0: Vec<f64>,
    a0: Vec<f64>,
    w: Vec<[f64; 2]>,
    #[serde(rename = "U0")]
    u0: CMatrix,
    #[serde(default)]
    residual: f64,
}

impl Serialize for CanonicalForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        CanonicalFormJson {
            m: self.m(),
            x0: self.x0.clone(),
            a0: self.p.a0.clone(),
            w: self.p.w.iter().map(|z| [z.re, z.im]).collect(),
            u0: self.u0.matrix().clone(),
            residual: self.residual,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CanonicalForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = CanonicalFormJson::deserialize(d)?;
        if raw.x0.len() != raw.m || raw.a0.len() != raw.m || raw.w.len() != raw.m || raw.u0.n() != 2 * raw.m {
            return Err(serde::de::Error::custom("canonical form fields disagree on m"));
        }
        Ok(CanonicalForm {
            u0: Unitary::from_parts(raw.u0),
            x0: raw.x0,
            p: StrictProjectionParams {
                a0: raw.a0,
                w: raw.w.into_iter().map(|[re, im]| Complex64::new(re, im)).collect(),
            },
            residual: raw.residual,
        })
    }
}

type Basis = Vec<Vec<Complex64>>;

/// Diagonalizes the compression of `x` to `span(basis)`. Returns the rotated
/// basis (ascending eigenvalues) and the eigenvalues.
fn diagonalize_in(basis: &[Vec<Complex64>], x: &CMatrix) -> Result<(Basis, Vec<f64>)> {
    let r = basis.len();
    let h = x.compress(basis, basis);
    let h = Hermitian::from_parts(&CMatrix::from_fn(r, |i, j| h[i][j]));
    let sd = h.eig()?;
    let n = basis.first().map_or(0, Vec::len);
    let rotated = (0..r)
        .map(|k| {
            let mut v = vec![ZERO; n];
            for (j, bj) in basis.iter().enumerate() {
                let c = sd.vectors[(j, k)];
                for (vi, bji) in v.iter_mut().zip(bj) {
                    *vi += bji * c;
                }
            }
            v
        })
        .collect();
    Ok((rotated, sd.values))
}

/// Maximal index runs in `0..len` where `joined(k)` links `k − 1` and `k`.
fn runs_where(len: usize, joined: impl Fn(usize) -> bool) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=len {
        if k == len || !joined(k) {
            out.push(start..k);
            start = k;
        }
    }
    out
}

/// Runs of ascending `values` with consecutive gaps at most `eps`.
fn runs(values: &[f64], eps: f64) -> Vec<Range<usize>> {
    runs_where(values.len(), |k| values[k] - values[k - 1] <= eps)
}

/// Re-diagonalizes `x` inside each run of the basis.
fn refine(basis: Basis, groups: &[Range<usize>], x: &CMatrix) -> Result<(Basis, Vec<f64>)> {
    let mut out_basis = Vec::with_capacity(basis.len());
    let mut out_vals = Vec::with_capacity(basis.len());
    for run in groups.iter().cloned() {
        if run.len() == 1 {
            out_basis.push(basis[run.start].clone());
            let v = &basis[run.start];
            out_vals.push(crate::matrix::dot(v, &x.apply(v)).re);
            continue;
        }
        let (b, v) = diagonalize_in(&basis[run], x)?;
        out_basis.extend(b);
        out_vals.extend(v);
    }
    Ok((out_basis, out_vals))
}

fn post(msg: String) -> Error {
    Error::PostconditionFailure(msg)
}

/// Canonical form of a strict, absolutely compatible pair.
///
/// 1. `m = |a − b|`, `z = I − a − b`. On every site `z = (1 − x)·diag(1, −1)`,
///    so its positive and negative spectral halves `Q₊`, `Q₋` have equal rank
///    and `Q₋` carries the pivot `P₀`.
/// 2. On `Q₊`, diagonalize `m`; inside each eigenvalue cluster, diagonalize
///    the compression of `a`; inside each cluster of that, the compression of
///    `a Q₋ a`. The resulting vectors `e_k` are the first coordinates of the
///    sites.
/// 3. The off-diagonal block `C = E₊* a E₋` has polar factor `V`; the second
///    coordinates are `F = E₋ V*`, which makes `e_k* a f_k` real and positive
///    (phase gauge `w ≡ 1`).
/// 4. Read `x_k = e_k* m e_k` and `a₀,k² = e_k* a e_k / x_k`, sort the sites by
///    `(x₀, a₀)` and verify the reconstruction against `tol.canon`.
pub fn canonicalize(a: &Effect, b: &Effect, tol: &Tolerances) -> Result<CanonicalForm> {
    a.matrix().ensure_same_dim(b.matrix())?;
    for (name, x) in [("a", a), ("b", b)] {
        let r = is_strict(x.matrix(), tol)?;
        if !r.strict {
            return Err(Error::NotStrict(format!(
                "{name} has spectrum [{:.6e}, {:.6e}]",
                r.min_modulus, r.max_modulus
            )));
        }
    }
    let report = is_abs_compatible(a, b, tol)?;
    if !report.compatible {
        return Err(Error::NotAbsolutelyCompatible(report.residual));
    }
    let n = a.n();
    if !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    let m_sites = n / 2;
    let id = CMatrix::identity(n);

    let modulus = abs_op(&(a.matrix() - b.matrix()), tol)?;
    let msd = modulus.eig()?;
    let cluster = tol.cluster * msd.max().abs().max(1.0);
    for k in 0..m_sites {
        let gap = msd.values[2 * k + 1] - msd.values[2 * k];
        if gap > cluster {
            return Err(Error::PairingFailure(format!(
                "eigenvalues {:.17e} and {:.17e} of |a − b| do not pair",
                msd.values[2 * k],
                msd.values[2 * k + 1]
            )));
        }
    }

    let z = Hermitian::from_parts(&(&(&id - a.matrix()) - b.matrix()));
    let zsd = z.eig()?;
    if let Some(&v) = zsd.values.iter().find(|v| v.abs() <= tol.spec) {
        return Err(Error::PairingFailure(format!("I − a − b is singular (eigenvalue {v:.3e})")));
    }
    let pos: Basis = (0..n).filter(|&k| zsd.values[k] > 0.0).map(|k| zsd.column(k)).collect();
    let neg: Basis = (0..n).filter(|&k| zsd.values[k] < 0.0).map(|k| zsd.column(k)).collect();
    if pos.len() != m_sites {
        return Err(Error::PairingFailure(format!(
            "spectral halves of I − a − b have ranks {} and {}",
            pos.len(),
            neg.len()
        )));
    }

    let (basis, xs) = diagonalize_in(&pos, modulus.matrix())?;
    let (basis, a11) = refine(basis, &runs(&xs, cluster), a.matrix())?;
    // sites sharing both x0 and a0 are told apart by a12 a12*
    let q_neg = Projection::onto(&neg, n);
    let a_qneg_a = &(a.matrix() * q_neg.matrix()) * a.matrix();
    let joint = runs_where(xs.len(), |k| xs[k] - xs[k - 1] <= cluster && (a11[k] - a11[k - 1]).abs() <= cluster);
    let (basis, _) = refine(basis, &joint, &a_qneg_a)?;

    let c_rows = a.matrix().compress(&basis, &neg);
    let c = CMatrix::from_fn(m_sites, |i, j| c_rows[i][j]);
    let (v, _) = polar_unitary(&c, tol)?;
    let paired: Basis = (0..m_sites)
        .map(|k| {
            let mut f = vec![ZERO; n];
            for (j, ej) in neg.iter().enumerate() {
                let coef = v.matrix()[(k, j)].conj();
                for (fi, eji) in f.iter_mut().zip(ej) {
                    *fi += eji * coef;
                }
            }
            f
        })
        .collect();

    let mut sites: Vec<(f64, f64, usize)> = Vec::with_capacity(m_sites);
    for (k, e) in basis.iter().enumerate() {
        let x = crate::matrix::dot(e, &modulus.matrix().apply(e)).re;
        let d = crate::matrix::dot(e, &a.matrix().apply(e)).re;
        if !strict_scalar(x, tol) {
            return Err(post(format!("site x0 = {x:.17e} is not strict")));
        }
        if x - d <= tol.spec {
            return Err(post(format!("site with x0 = {x:.6e} has x0 − a11 = {:.3e}: no strict b0", x - d)));
        }
        let a0 = (d / x).max(0.0).sqrt();
        if !strict_scalar(a0, tol) {
            return Err(post(format!("site a0 = {a0:.17e} is not strict")));
        }
        sites.push((x, a0, k));
    }
    sites.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.total_cmp(&q.1)).then(p.2.cmp(&q.2)));

    let mut cols = Vec::with_capacity(n);
    for &(_, _, k) in &sites {
        cols.push(basis[k].clone());
        cols.push(paired[k].clone());
    }
    let u0 = Unitary::from_parts(CMatrix::from_columns(&cols));
    let mut form = CanonicalForm {
        u0,
        x0: sites.iter().map(|s| s.0).collect(),
        p: StrictProjectionParams {
            a0: sites.iter().map(|s| s.1).collect(),
            w: vec![Complex64::new(1.0, 0.0); m_sites],
        },
        residual: 0.0,
    };
    let residual = form.residual_against(a.matrix(), b.matrix())?;
    if residual > tol.canon {
        return Err(post(format!("reconstruction residual {residual:.3e} exceeds {:.1e}", tol.canon)));
    }
    form.residual = residual;
    Ok(form)
}

/// The pair re-expressed with the pivots in the second slot:
///
/// ```text
/// U* a U = ((1 − x₀) ⊗ I₂) P̃ + (x₀ ⊗ I₂) P₀
/// U* b U = ((1 − x₀) ⊗ I₂) P̃ + (x₀ ⊗ I₂) P₁
/// ```
///
/// with `P̃ = [[a₀², a₀ s], [a₀ s, s²]]` free of phases.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorollaryForm {
    #[serde(rename = "U")]
    pub u: Unitary,
    pub x0: Vec<f64>,
    pub a0: Vec<f64>,
}

impl CorollaryForm {
    pub fn projection(&self) -> M2OverDiag {
        M2OverDiag::new(self.a0.iter().map(|&a| projection_block(a, Complex64::new(1.0, 0.0))).collect())
            .expect("finite parameters")
    }

    pub fn sites(&self) -> (M2OverDiag, M2OverDiag) {
        let p = self.projection();
        let mk = |pivot: Block2| {
            p.sites().iter().zip(&self.x0).map(|(pk, &x)| pk.scale(1.0 - x) + pivot.scale(x)).collect::<Vec<_>>()
        };
        (M2OverDiag::new(mk(Block2::P0)).expect("finite"), M2OverDiag::new(mk(Block2::P1)).expect("finite"))
    }

    pub fn reconstruct(&self) -> (CMatrix, CMatrix) {
        let (a, b) = self.sites();
        (self.u.conjugate(&a.embed()), self.u.conjugate(&b.embed()))
    }
}

/// Converts a canonical form into the pivot-second representation.
///
/// With `V_k = [[s, −w a₀], [a₀, w s]]` (so `P_k = V_k* P₀ V_k`) and
/// `W₀ = diag(−1, 1)`, the new unitary is `U = U₀ · embed(V* W₀)`.
pub fn corollary_form(cf: &CanonicalForm) -> CorollaryForm {
    let v = pivot_unitary(&cf.p);
    let w0 = Block2::diag(-1.0, 1.0);
    let t = v.map(|vk| vk.adjoint() * w0);
    let u = Unitary::from_parts(cf.u0.matrix() * &t.embed());
    CorollaryForm { u, x0: cf.x0.clone(), a0: cf.p.a0.clone() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_site(b: Block2) -> M2OverDiag {
        M2OverDiag::new(vec![b]).unwrap()
    }

    #[test]
    fn strict_unitary_hadamard() {
        let q = StrictUnitaryParams {
            a0: vec![FRAC_1_SQRT_2],
            w1: vec![c(1.0, 0.0)],
            w2: vec![c(1.0, 0.0)],
            w3: vec![c(1.0, 0.0)],
        };
        let u = strict_unitary_from_params(&q, &tol()).unwrap();
        let h = Block2::real(FRAC_1_SQRT_2, FRAC_1_SQRT_2, FRAC_1_SQRT_2, -FRAC_1_SQRT_2);
        assert!(u.max_diff(&one_site(h)) < 1e-15);
        assert!(is_strict_unitary(&u, &tol()).unwrap());
    }

    #[test]
    fn strict_unitary_boundary_rejected() {
        let q = StrictUnitaryParams {
            a0: vec![1e-300],
            w1: vec![c(1.0, 0.0)],
            w2: vec![c(1.0, 0.0)],
            w3: vec![c(1.0, 0.0)],
        };
        assert!(matches!(strict_unitary_from_params(&q, &tol()), Err(Error::NotStrictParams(_))));
    }

    #[test]
    fn strict_unitary_validator_examples() {
        let t = tol();
        assert!(!is_strict_unitary(&one_site(Block2::IDENTITY), &t).unwrap());
        let r = FRAC_1_SQRT_2;
        assert!(is_strict_unitary(&one_site(Block2::real(r, -r, r, r)), &t).unwrap());
        assert!(!is_strict_unitary(&one_site(Block2::real(0.0, 1.0, 1.0, 0.0)), &t).unwrap());
        assert!(matches!(
            is_strict_unitary(&one_site(Block2::real(0.5, 0.5, 0.5, 0.5)), &t),
            Err(Error::NotUnitary(_))
        ));
    }

    #[test]
    fn strict_projection_examples() {
        let t = tol();
        let p = strict_projection_from_params(
            &StrictProjectionParams { a0: vec![FRAC_1_SQRT_2], w: vec![c(1.0, 0.0)] },
            &t,
        )
        .unwrap();
        assert!(p.max_diff(&one_site(Block2::real(0.5, 0.5, 0.5, 0.5))) < 1e-15);
        let pi = strict_projection_from_params(
            &StrictProjectionParams { a0: vec![FRAC_1_SQRT_2], w: vec![c(0.0, 1.0)] },
            &t,
        )
        .unwrap();
        let expected = Block2::new(c(0.5, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(0.5, 0.0));
        assert!(pi.max_diff(&one_site(expected)) < 1e-15);
        assert!(is_strict_projection(&pi, &t).unwrap());
        for a0 in [0.0, 1.0] {
            assert!(matches!(
                strict_projection_from_params(&StrictProjectionParams { a0: vec![a0], w: vec![c(1.0, 0.0)] }, &t),
                Err(Error::NotStrictParams(_))
            ));
        }
    }

    #[test]
    fn strict_projection_validator_examples() {
        let t = tol();
        assert!(!is_strict_projection(&one_site(Block2::P0), &t).unwrap());
        assert!(is_strict_projection(&one_site(Block2::real(0.5, 0.5, 0.5, 0.5)), &t).unwrap());
        assert!(is_strict_projection(&one_site(Block2::real(0.5, -0.5, -0.5, 0.5)), &t).unwrap());
        assert!(matches!(
            is_strict_projection(&one_site(Block2::real(0.5, 0.0, 0.0, 0.5)), &t),
            Err(Error::NotProjection(_))
        ));
    }

    #[test]
    fn projection_pair_from_hadamard() {
        let t = tol();
        let r = FRAC_1_SQRT_2;
        let (p, pp) = projection_pair_from_unitary(&one_site(Block2::real(r, r, r, -r)), &t).unwrap();
        assert!(p.max_diff(&one_site(Block2::real(0.5, 0.5, 0.5, 0.5))) < 1e-15);
        assert!(pp.max_diff(&one_site(Block2::real(0.5, -0.5, -0.5, 0.5))) < 1e-15);
        assert!(matches!(projection_pair_from_unitary(&one_site(Block2::IDENTITY), &t), Err(Error::NotStrictUnitary)));
    }

    #[test]
    fn conjugate_to_pivot_examples() {
        let t = tol();
        let r = FRAC_1_SQRT_2;
        let p = one_site(Block2::real(0.5, 0.5, 0.5, 0.5));
        let u = conjugate_to_pivot(&p, &t).unwrap();
        assert!(u.max_diff(&one_site(Block2::real(r, -r, r, r))) < 1e-15);
        let back = u.map(|b| b.adjoint() * Block2::P0 * *b);
        assert!(back.max_diff(&p) < 1e-15);

        let pi = one_site(Block2::new(c(0.5, 0.0), c(0.0, 0.5), c(0.0, -0.5), c(0.5, 0.0)));
        let u = conjugate_to_pivot(&pi, &t).unwrap();
        assert!((u.sites()[0].get(0, 1) - c(0.0, -r)).norm() < 1e-15);
        let back = u.map(|b| b.adjoint() * Block2::P0 * *b);
        assert!(back.max_diff(&pi) < 1e-15);
        assert!(is_strict_unitary(&u, &t).unwrap());

        assert!(matches!(conjugate_to_pivot(&one_site(Block2::P0), &t), Err(Error::NotStrictProjection)));
    }

    #[test]
    fn dilation_of_scalar_halves() {
        let t = tol();
        let h = Effect::new(CMatrix::scalar(1, 0.5), &t).unwrap();
        let (a1, b1) = commuting_pair_dilation(&h, &h, &t).unwrap();
        let ea = CMatrix::from_real_rows(&[&[0.25, 0.25], &[0.25, 0.75]]);
        let eb = CMatrix::from_real_rows(&[&[0.25, -0.25], &[-0.25, 0.75]]);
        assert!((a1.matrix() - &ea).max_abs() < 1e-16);
        assert!((b1.matrix() - &eb).max_abs() < 1e-16);
        assert!(is_abs_compatible(&a1, &b1, &t).unwrap().compatible);
    }

    #[test]
    fn dilation_modulus_is_doubled_sum_of_squares() {
        let t = tol();
        let a = Effect::new(CMatrix::scalar(1, 0.6), &t).unwrap();
        let b = Effect::new(CMatrix::scalar(1, 0.3), &t).unwrap();
        let (a1, b1) = commuting_pair_dilation(&a, &b, &t).unwrap();
        assert!(is_abs_compatible(&a1, &b1, &t).unwrap().compatible);
        let m = abs_op(&(a1.matrix() - b1.matrix()), &t).unwrap();
        let sd = m.eig().unwrap();
        assert!((sd.values[0] - 0.45).abs() < 1e-15);
        assert!((sd.values[1] - 0.45).abs() < 1e-15);
    }

    #[test]
    fn dilation_precondition_errors() {
        let t = tol();
        let big = Effect::new(CMatrix::scalar(1, 0.9), &t).unwrap();
        assert!(matches!(commuting_pair_dilation(&big, &big, &t), Err(Error::SumExceedsOne(_))));
        let proj = Effect::new(CMatrix::diag_real(&[1.0, 0.0]), &t).unwrap();
        let half = Effect::new(CMatrix::scalar(2, 0.5), &t).unwrap();
        assert!(matches!(commuting_pair_dilation(&proj, &half, &t), Err(Error::NotStrict(_))));
        let x = Effect::new(CMatrix::from_real_rows(&[&[0.5, 0.2], &[0.2, 0.5]]), &t).unwrap();
        let y = Effect::new(CMatrix::diag_real(&[0.3, 0.6]), &t).unwrap();
        assert!(matches!(commuting_pair_dilation(&x, &y, &t), Err(Error::NotCommuting(_))));
    }

    #[test]
    fn canonical_pair_single_site() {
        let t = tol();
        let p = StrictProjectionParams { a0: vec![FRAC_1_SQRT_2], w: vec![c(1.0, 0.0)] };
        let (a, b) = canonical_pair(&[0.5], &p, &t).unwrap();
        let ea = CMatrix::from_real_rows(&[&[0.25, 0.25], &[0.25, 0.75]]);
        assert!((a.matrix() - &ea).max_abs() < 1e-15);
        assert!(is_abs_compatible(&a, &b, &t).unwrap().compatible);
        assert!(matches!(canonical_pair(&[1.0], &p, &t), Err(Error::NotStrictParams(_))));
    }

    #[test]
    fn canonicalize_single_site_fixture() {
        let t = tol();
        let a = Effect::new(CMatrix::from_real_rows(&[&[0.25, 0.25], &[0.25, 0.75]]), &t).unwrap();
        let b = Effect::new(CMatrix::from_real_rows(&[&[0.25, -0.25], &[-0.25, 0.75]]), &t).unwrap();
        let cf = canonicalize(&a, &b, &t).unwrap();
        assert_eq!(cf.m(), 1);
        assert!((cf.x0[0] - 0.5).abs() < 1e-14);
        assert!((cf.p.a0[0] - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!(cf.residual <= 1e-14);
        // U0 is diagonal: identity up to per-coordinate phases
        let u = cf.u0.matrix();
        assert!(u[(0, 1)].norm() < 1e-14 && u[(1, 0)].norm() < 1e-14);
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn canonicalize_rejects_equal_pair() {
        let t = tol();
        let a = Effect::new(CMatrix::from_real_rows(&[&[0.25, 0.25], &[0.25, 0.75]]), &t).unwrap();
        assert!(matches!(canonicalize(&a, &a, &t), Err(Error::NotAbsolutelyCompatible(_))));
        let p = Effect::new(CMatrix::diag_real(&[1.0, 0.0]), &t).unwrap();
        assert!(matches!(canonicalize(&p, &p, &t), Err(Error::NotStrict(_))));
    }

    #[test]
    fn canonicalize_degenerate_sites() {
        let t = tol();
        // equal x0, different a0: the refinement by a must separate the sites
        let p = StrictProjectionParams { a0: vec![0.3, 0.7, 0.3], w: vec![c(0.0, 1.0), c(-1.0, 0.0), c(0.6, 0.8)] };
        let x0 = [0.5, 0.5, 0.5];
        let (a, b) = canonical_pair(&x0, &p, &t).unwrap();
        let cf = canonicalize(&a, &b, &t).unwrap();
        assert!(cf.residual < 1e-12, "{}", cf.residual);
        assert!(cf.x0.iter().all(|x| (x - 0.5).abs() < 1e-12));
        let mut a0 = cf.p.a0.clone();
        a0.sort_by(f64::total_cmp);
        assert!((a0[0] - 0.3).abs() < 1e-12 && (a0[1] - 0.3).abs() < 1e-12 && (a0[2] - 0.7).abs() < 1e-12);
    }

    #[test]
    fn corollary_form_reproduces_pair() {
        let t = tol();
        let p = StrictProjectionParams { a0: vec![0.4, 0.8], w: vec![c(0.0, 1.0), c(1.0, 0.0)] };
        let (a, b) = canonical_pair(&[0.3, 0.6], &p, &t).unwrap();
        let cf = canonicalize(&a, &b, &t).unwrap();
        let cor = corollary_form(&cf);
        let (ra, rb) = cor.reconstruct();
        assert!(op_norm(&(a.matrix() - &ra)).unwrap() < 1e-12);
        assert!(op_norm(&(b.matrix() - &rb)).unwrap() < 1e-12);
        assert_eq!(cor.a0, cf.p.a0);
        assert!(unitarity_defect(cor.u.matrix()).unwrap() < 1e-12);
    }

    #[test]
    fn canonical_form_json_schema() {
        let t = tol();
        let p = StrictProjectionParams { a0: vec![0.4], w: vec![c(1.0, 0.0)] };
        let (a, b) = canonical_pair(&[0.3], &p, &t).unwrap();
        let cf = canonicalize(&a, &b, &t).unwrap();
        let v = serde_json::to_value(&cf).unwrap();
        for key in ["m", "x0", "a0", "w", "U0"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: CanonicalForm = serde_json::from_value(v).unwrap();
        assert_eq!(back, cf);
    }
}
