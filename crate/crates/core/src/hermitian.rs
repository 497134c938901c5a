//! Hermitian spectral machinery.
//!
//! Everything downstream (moduli, support and range projections, polar
//! factors, strictness) is functional calculus on top of [`eig_hermitian`],
//! a cyclic complex Jacobi solver. Jacobi is slow compared to tridiagonal QR
//! but it is accurate for small eigenvalues, which is exactly where strictness
//! and null-projection decisions are made, and its sweep order is fixed, so
//! results are bitwise reproducible.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{dot, vec_norm, CMatrix, ONE, ZERO};
use crate::Tolerances;

const MAX_SWEEPS: usize = 100;
const JACOBI_STOP: f64 = 1e-14;

/// A self-adjoint matrix. The stored matrix is exactly Hermitian: the
/// constructor replaces the input by its Hermitian part once the defect check
/// has passed.
#[derive(Debug, Clone, PartialEq)]
pub struct Hermitian(CMatrix);

impl Hermitian {
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        let defect = m.hermitian_defect();
        if defect > tol.herm * m.max_abs().max(1.0) {
            return Err(Error::NotHermitian(defect));
        }
        Ok(Self(m.hermitian_part()))
    }

    /// Takes the Hermitian part without checking. For values that are
    /// Hermitian by construction.
    pub fn from_parts(m: &CMatrix) -> Self {
        Self(m.hermitian_part())
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn eig(&self) -> Result<SpectralDecomposition> {
        eig_hermitian(self)
    }

    /// Largest eigenvalue modulus.
    pub fn op_norm(&self) -> Result<f64> {
        let sd = self.eig()?;
        Ok(sd.values.iter().fold(0.0f64, |m, v| m.max(v.abs())))
    }
}

/// Hermitian with spectrum in `[0, 1]` up to `tol.spec`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect(Hermitian);

impl Effect {
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        Self::from_hermitian(Hermitian::new(m, tol)?, tol)
    }

    pub fn from_hermitian(h: Hermitian, tol: &Tolerances) -> Result<Self> {
        let sd = h.eig()?;
        let (min, max) = (sd.min(), sd.max());
        if min < -tol.spec || max > 1.0 + tol.spec {
            return Err(Error::NotEffect { min, max });
        }
        Ok(Self(h))
    }

    pub fn hermitian(&self) -> &Hermitian {
        &self.0
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0 .0
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    /// `I − a`.
    pub fn complement(&self) -> Effect {
        let n = self.n();
        Effect(Hermitian::from_parts(&(&CMatrix::identity(n) - self.matrix())))
    }
}

/// Hermitian idempotent.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection(Effect);

impl Projection {
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        let h = Hermitian::new(m, tol)?;
        let defect = idempotence_defect(h.matrix())?;
        if defect > tol.proj {
            return Err(Error::NotProjection(defect));
        }
        Ok(Self(Effect(h)))
    }

    pub fn zero(n: usize) -> Self {
        Self(Effect(Hermitian(CMatrix::zeros(n))))
    }

    pub fn identity(n: usize) -> Self {
        Self(Effect(Hermitian(CMatrix::identity(n))))
    }

    /// Orthogonal projection onto the span of orthonormal `cols`.
    pub fn onto(cols: &[Vec<Complex64>], n: usize) -> Self {
        let ones = vec![1.0; cols.len()];
        Self(Effect(Hermitian::from_parts(&CMatrix::outer_sum(cols, &ones, n))))
    }

    pub fn effect(&self) -> &Effect {
        &self.0
    }

    pub fn matrix(&self) -> &CMatrix {
        self.0.matrix()
    }

    pub fn n(&self) -> usize {
        self.0.n()
    }

    pub fn complement(&self) -> Projection {
        Projection(self.0.complement())
    }

    /// Rank, read off the trace.
    pub fn rank(&self) -> usize {
        self.matrix().trace().re.round().max(0.0) as usize
    }

    /// Orthonormal basis of the range, in eigensolver order.
    pub fn basis(&self) -> Result<Vec<Vec<Complex64>>> {
        let sd = eig_hermitian(self.0.hermitian())?;
        Ok(sd.values.iter().enumerate().filter(|(_, &v)| v > 0.5).map(|(k, _)| sd.vectors.column(k)).collect())
    }
}

fn idempotence_defect(m: &CMatrix) -> Result<f64> {
    let d = &(m * m) - m;
    Hermitian::from_parts(&d).op_norm()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Unitary(CMatrix);

impl serde::Serialize for Unitary {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl Unitary {
    pub fn new(m: CMatrix, tol: &Tolerances) -> Result<Self> {
        let defect = unitarity_defect(&m)?;
        if defect > tol.unit {
            return Err(Error::NotUnitary(defect));
        }
        Ok(Self(m))
    }

    /// Wraps a matrix that is unitary by construction.
    pub fn from_parts(m: CMatrix) -> Self {
        Self(m)
    }

    pub fn identity(n: usize) -> Self {
        Self(CMatrix::identity(n))
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    /// `U X U*`.
    pub fn conjugate(&self, x: &CMatrix) -> CMatrix {
        &(&self.0 * x) * &self.0.adjoint()
    }

    /// `U* X U`.
    pub fn conjugate_inv(&self, x: &CMatrix) -> CMatrix {
        &(&self.0.adjoint() * x) * &self.0
    }
}

/// `‖U*U − I‖_op`.
pub fn unitarity_defect(m: &CMatrix) -> Result<f64> {
    let d = &(&m.adjoint() * m) - &CMatrix::identity(m.n());
    Hermitian::from_parts(&d).op_norm()
}

/// Operator norm of an arbitrary square matrix.
pub fn op_norm(x: &CMatrix) -> Result<f64> {
    if x.hermitian_defect() == 0.0 {
        return Hermitian(x.clone()).op_norm();
    }
    let gram = Hermitian::from_parts(&(&x.adjoint() * x));
    let sd = gram.eig()?;
    Ok(sd.max().max(0.0).sqrt())
}

/// Eigenvalues in ascending order, eigenvectors as the columns of a unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl SpectralDecomposition {
    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn vectors(&self) -> Unitary {
        Unitary(self.vectors.clone())
    }

    pub fn column(&self, k: usize) -> Vec<Complex64> {
        self.vectors.column(k)
    }

    /// `V diag(f(λ)) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let n = self.vectors.n();
        let weights: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let cols: Vec<Vec<Complex64>> = (0..n).map(|k| self.vectors.column(k)).collect();
        CMatrix::outer_sum(&cols, &weights, n)
    }

    /// Groups ascending eigenvalues into maximal runs whose consecutive gaps
    /// are at most `eps`. Returns index ranges.
    pub fn clusters(&self, eps: f64) -> Vec<std::ops::Range<usize>> {
        let mut out = Vec::new();
        let mut start = 0;
        for k in 1..=self.values.len() {
            if k == self.values.len() || self.values[k] - self.values[k - 1] > eps {
                out.push(start..k);
                start = k;
            }
        }
        out
    }

    /// Projection onto the eigenspaces of every cluster accepted by `keep`.
    /// `keep` sees the eigenvalues of one cluster at a time.
    pub fn spectral_projection(&self, eps: f64, keep: impl Fn(&[f64]) -> bool) -> Projection {
        let n = self.vectors.n();
        let cols: Vec<Vec<Complex64>> = self
            .clusters(eps)
            .into_iter()
            .filter(|r| keep(&self.values[r.clone()]))
            .flat_map(|r| r.map(|k| self.vectors.column(k)))
            .collect();
        Projection::onto(&cols, n)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi sweeps.
///
/// Pivot order is row-major over the strict upper triangle; sweeps stop once
/// the off-diagonal Frobenius mass is at most `1e-14 · ‖H‖_F`.
pub fn eig_hermitian(h: &Hermitian) -> Result<SpectralDecomposition> {
    let (values, vectors) = jacobi(h.matrix())?;
    Ok(SpectralDecomposition { values, vectors })
}

fn off_diagonal_mass(a: &CMatrix) -> f64 {
    let n = a.n();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn jacobi(h: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = h.n();
    let mut a = h.clone();
    let mut v = CMatrix::identity(n);
    let scale = a.frobenius();
    let stop = JACOBI_STOP * scale;
    let negligible = f64::MIN_POSITIVE.max(1e-18 * scale / (n as f64));

    let mut sweeps = 0;
    let mut off = off_diagonal_mass(&a);
    while off > stop {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q, negligible);
            }
        }
        sweeps += 1;
        off = off_diagonal_mass(&a);
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    Ok((values, vectors))
}

/// One Jacobi rotation annihilating `a[p][q]`.
///
/// The complex pivot `h = |h| e^{iφ}` is first made real by the phase change
/// `e_q ↦ e^{-iφ} e_q`, after which the usual real rotation applies. The
/// combined column transform is
/// `J = [[c, s], [−s e^{-iφ}, c e^{-iφ}]]` on coordinates `(p, q)`.
fn rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize, negligible: f64) {
    let h = a[(p, q)];
    let habs = h.norm();
    if habs <= negligible {
        a[(p, q)] = ZERO;
        a[(q, p)] = ZERO;
        return;
    }
    let n = a.n();
    let phase = (h / habs).conj();
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * habs);
    let t = if tau >= 0.0 { 1.0 / (tau + 1f64.hypot(tau)) } else { -1.0 / (-tau + 1f64.hypot(tau)) };
    let c = 1.0 / 1f64.hypot(t);
    let s = t * c;

    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = phase * (-s);
    let jqq = phase * c;

    // columns: A ← A J
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    // rows: A ← J* A
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = Complex64::new(a[(q, q)].re, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

/// `V diag(f(λ)) V*`, failing if `f` leaves the reals at some eigenvalue.
pub fn func_calc(h: &Hermitian, f: impl Fn(f64) -> f64) -> Result<Hermitian> {
    let sd = h.eig()?;
    if let Some(&bad) = sd.values.iter().find(|&&v| !f(v).is_finite()) {
        return Err(Error::DomainError(bad));
    }
    Ok(Hermitian::from_parts(&sd.map(f)))
}

/// Modulus `|x| = (x*x)^{1/2}`.
///
/// Hermitian inputs take the direct route `V diag(|λ|) V*`, which keeps small
/// eigenvalues accurate; the square-root route loses half the digits near 0.
pub fn abs_op(x: &CMatrix, tol: &Tolerances) -> Result<Hermitian> {
    if x.hermitian_defect() <= tol.herm * x.max_abs().max(1.0) {
        let sd = Hermitian::from_parts(x).eig()?;
        return Ok(Hermitian::from_parts(&sd.map(f64::abs)));
    }
    Ok(right_modulus(x)?.2)
}

/// Eigendecomposition of `X*X` with singular values taken as `‖X v_k‖`
/// rather than `√λ_k`: the square root would amplify rounding in the small
/// eigenvalues of `X*X` to about `√ε`.
fn right_modulus(x: &CMatrix) -> Result<(SpectralDecomposition, Vec<f64>, Hermitian)> {
    let gram = Hermitian::from_parts(&(&x.adjoint() * x));
    let sd = gram.eig()?;
    let n = x.n();
    let sigma: Vec<f64> = (0..n).map(|k| vec_norm(&x.apply(&sd.column(k)))).collect();
    let cols: Vec<Vec<Complex64>> = (0..n).map(|k| sd.column(k)).collect();
    let modulus = Hermitian::from_parts(&CMatrix::outer_sum(&cols, &sigma, n));
    Ok((sd, sigma, modulus))
}

fn cluster_eps(sd: &SpectralDecomposition, tol: &Tolerances) -> f64 {
    let norm = sd.min().abs().max(sd.max().abs());
    tol.cluster * norm.max(1.0)
}

/// Support projection `s(a)`: the eigenvalue-1 eigenspace of an effect.
pub fn support_s(a: &Effect, tol: &Tolerances) -> Result<Projection> {
    let sd = a.hermitian().eig()?;
    let eps = cluster_eps(&sd, tol);
    Ok(sd.spectral_projection(eps, |c| c[c.len() - 1] >= 1.0 - tol.spec))
}

/// Null projection `n(a)`: the kernel of an effect. Always `I − r(a)`.
pub fn null_n(a: &Effect, tol: &Tolerances) -> Result<Projection> {
    Ok(range_projection(a.hermitian(), tol)?.complement())
}

/// Range projection `r(a)` of a positive operator.
pub fn range_projection(a: &Hermitian, tol: &Tolerances) -> Result<Projection> {
    let sd = a.eig()?;
    let scale = sd.max().abs().max(1.0);
    if sd.min() < -tol.spec * scale {
        return Err(Error::NegativeSpectrum(sd.min()));
    }
    let eps = cluster_eps(&sd, tol);
    let cut = tol.spec * scale;
    Ok(sd.spectral_projection(eps, |c| c[0] > cut))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrictnessReport {
    pub strict: bool,
    /// Rank of `s(|x|)`.
    pub support_rank: usize,
    /// Rank of `n(|x|)`.
    pub null_rank: usize,
    pub min_modulus: f64,
    pub max_modulus: f64,
}

/// `x` is strict when the spectrum of `|x|` lies in `(ε, 1 − ε)`.
pub fn is_strict(x: &CMatrix, tol: &Tolerances) -> Result<StrictnessReport> {
    let modulus = abs_op(x, tol)?;
    let sd = modulus.eig()?;
    let support_rank = sd.values.iter().filter(|&&v| v >= 1.0 - tol.spec).count();
    let null_rank = sd.values.iter().filter(|&&v| v <= tol.spec).count();
    let (min, max) = (sd.min(), sd.max());
    Ok(StrictnessReport {
        strict: min > tol.spec && max < 1.0 - tol.spec,
        support_rank,
        null_rank,
        min_modulus: min,
        max_modulus: max,
    })
}

/// Polar decomposition `x = u |x|` with `u` unitary.
///
/// For singular `x` the partial isometry is completed to a unitary by mapping
/// the kernel basis (eigenvectors of `x*x` with zero eigenvalue, in
/// eigensolver order) onto a basis of the cokernel obtained by Gram–Schmidt
/// over the standard basis in index order. `x = 0` gives `u = I`.
pub fn polar_unitary(x: &CMatrix, _tol: &Tolerances) -> Result<(Unitary, Hermitian)> {
    let n = x.n();
    let (sd, sigma, modulus) = right_modulus(x)?;
    let top = sigma.iter().copied().fold(0.0, f64::max);
    // below this a singular value is rounding noise of an exact zero
    let cut = 1e3 * f64::EPSILON * top.max(1.0);

    // Largest singular values first: they give the best-conditioned left vectors.
    let mut left: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut right: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    let mut kernel: Vec<Vec<Complex64>> = Vec::new();
    for k in (0..n).rev() {
        let vk = sd.column(k);
        if sigma[k] > cut {
            let mut uk: Vec<Complex64> = x.apply(&vk).into_iter().map(|z| z / sigma[k]).collect();
            orthonormalize_against(&mut uk, &left);
            left.push(uk);
            right.push(vk);
        } else {
            kernel.push(vk);
        }
    }
    kernel.reverse();
    let mut e = vec![ZERO; n];
    for i in 0..n {
        if left.len() == n {
            break;
        }
        e.iter_mut().for_each(|z| *z = ZERO);
        e[i] = ONE;
        let mut cand = e.clone();
        if orthonormalize_against(&mut cand, &left) > 1e-6 {
            left.push(cand);
        }
    }
    right.extend(kernel);
    debug_assert_eq!(left.len(), right.len());

    let mut u = CMatrix::zeros(n);
    for (l, r) in left.iter().zip(&right) {
        for i in 0..n {
            for j in 0..n {
                u[(i, j)] += l[i] * r[j].conj();
            }
        }
    }
    Ok((Unitary(u), modulus))
}

/// Modified Gram–Schmidt (two passes) of `v` against orthonormal `basis`,
/// then normalization. Returns the norm before normalization.
fn orthonormalize_against(v: &mut [Complex64], basis: &[Vec<Complex64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, v);
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= c * bi;
            }
        }
    }
    let norm = vec_norm(v);
    if norm > 0.0 {
        v.iter_mut().for_each(|z| *z /= norm);
    }
    norm
}

/// Jordan product `(ab + ba) / 2`.
pub fn jordan_product(a: &Hermitian, b: &Hermitian) -> Result<Hermitian> {
    a.matrix().ensure_same_dim(b.matrix())?;
    let ab = a.matrix() * b.matrix();
    let ba = b.matrix() * a.matrix();
    Ok(Hermitian::from_parts(&(&ab + &ba).scale(0.5)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn herm(rows: &[&[f64]]) -> Hermitian {
        Hermitian::new(CMatrix::from_real_rows(rows), &tol()).unwrap()
    }

    fn close(a: &CMatrix, b: &CMatrix, eps: f64) -> bool {
        (a - b).max_abs() <= eps
    }

    #[test]
    fn eig_identity_and_diag() {
        let sd = eig_hermitian(&herm(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(sd.values, vec![1.0, 1.0]);

        let sd = eig_hermitian(&herm(&[&[0.0, 0.0], &[0.0, 1.0]])).unwrap();
        assert_eq!(sd.values, vec![0.0, 1.0]);
        assert!(close(&sd.vectors, &CMatrix::identity(2), 0.0));
    }

    #[test]
    fn eig_all_ones() {
        // characteristic polynomial λ² − 2λ
        let sd = eig_hermitian(&herm(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap();
        assert!((sd.values[0] - 0.0).abs() < 1e-15);
        assert!((sd.values[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn eig_complex_reconstructs() {
        let m = CMatrix::from_fn(4, |i, j| {
            let re = ((i * 7 + j * 3) % 5) as f64 - 2.0 + if i == j { 3.0 } else { 0.0 };
            let im = if i == j {
                0.0
            } else if i < j {
                (i + 2 * j) as f64 * 0.1
            } else {
                -((j + 2 * i) as f64 * 0.1)
            };
            Complex64::new(re, im)
        });
        let h = Hermitian::new(m.hermitian_part(), &tol()).unwrap();
        let sd = h.eig().unwrap();
        assert!(sd.values.windows(2).all(|w| w[0] <= w[1]));
        let recon = sd.map(|v| v);
        assert!(close(&recon, h.matrix(), 1e-12));
        assert!(unitarity_defect(&sd.vectors).unwrap() < 1e-13);
    }

    #[test]
    fn not_hermitian_is_rejected() {
        let m = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(Hermitian::new(m, &tol()), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn func_calc_examples() {
        let h = herm(&[&[1.0, 1.0], &[1.0, 1.0]]);
        assert!(close(func_calc(&h, |t| t).unwrap().matrix(), h.matrix(), 1e-14));
        let sq = func_calc(&h, |t| t * t).unwrap();
        assert!(close(sq.matrix(), &CMatrix::from_real_rows(&[&[2.0, 2.0], &[2.0, 2.0]]), 1e-14));
        let d = herm(&[&[4.0, 0.0], &[0.0, 9.0]]);
        let r = func_calc(&d, f64::sqrt).unwrap();
        assert!(close(r.matrix(), &CMatrix::diag_real(&[2.0, 3.0]), 1e-15));
    }

    #[test]
    fn func_calc_domain_error() {
        let d = herm(&[&[-1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(func_calc(&d, f64::sqrt), Err(Error::DomainError(-1.0)));
    }

    #[test]
    fn abs_examples() {
        let m = abs_op(&CMatrix::diag_real(&[1.0, -1.0]), &tol()).unwrap();
        assert!(close(m.matrix(), &CMatrix::identity(2), 0.0));
        let z = abs_op(&CMatrix::zeros(3), &tol()).unwrap();
        assert!(close(z.matrix(), &CMatrix::zeros(3), 0.0));
        // non-Hermitian route: |[[0,1],[0,0]]| = diag(0,1)
        let j = abs_op(&CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]), &tol()).unwrap();
        assert!(close(j.matrix(), &CMatrix::diag_real(&[0.0, 1.0]), 1e-15));
    }

    #[test]
    fn support_null_range_examples() {
        let t = tol();
        let i2 = Effect::new(CMatrix::identity(2), &t).unwrap();
        assert!(close(support_s(&i2, &t).unwrap().matrix(), &CMatrix::identity(2), 0.0));

        let a = Effect::new(CMatrix::diag_real(&[1.0, 0.5]), &t).unwrap();
        assert!(close(support_s(&a, &t).unwrap().matrix(), &CMatrix::diag_real(&[1.0, 0.0]), 0.0));

        let strict = Effect::new(CMatrix::diag_real(&[0.2, 0.7, 0.4]), &t).unwrap();
        assert_eq!(support_s(&strict, &t).unwrap().rank(), 0);
        assert_eq!(null_n(&strict, &t).unwrap().rank(), 0);

        let zero = Effect::new(CMatrix::zeros(2), &t).unwrap();
        assert!(close(null_n(&zero, &t).unwrap().matrix(), &CMatrix::identity(2), 0.0));

        let b = Effect::new(CMatrix::diag_real(&[0.0, 0.5]), &t).unwrap();
        assert!(close(null_n(&b, &t).unwrap().matrix(), &CMatrix::diag_real(&[1.0, 0.0]), 0.0));

        let c = Hermitian::new(CMatrix::diag_real(&[0.0, 0.3]), &t).unwrap();
        assert!(close(range_projection(&c, &t).unwrap().matrix(), &CMatrix::diag_real(&[0.0, 1.0]), 0.0));
        let z = Hermitian::new(CMatrix::zeros(2), &t).unwrap();
        assert_eq!(range_projection(&z, &t).unwrap().rank(), 0);
        let neg = Hermitian::new(CMatrix::diag_real(&[-0.1, 0.3]), &t).unwrap();
        assert!(matches!(range_projection(&neg, &t), Err(Error::NegativeSpectrum(_))));
    }

    #[test]
    fn strictness_examples() {
        let t = tol();
        assert!(is_strict(&CMatrix::scalar(2, 0.5), &t).unwrap().strict);
        let p = CMatrix::diag_real(&[1.0, 0.0]);
        let r = is_strict(&p, &t).unwrap();
        assert!(!r.strict);
        assert_eq!((r.support_rank, r.null_rank), (1, 1));
        assert!(!is_strict(&CMatrix::zeros(2), &t).unwrap().strict);
        assert!(!is_strict(&CMatrix::identity(2), &t).unwrap().strict);
        assert!(is_strict(&CMatrix::diag_real(&[0.3, 0.9]), &t).unwrap().strict);
        assert!(is_strict(&CMatrix::diag_real(&[0.7, 0.1]), &t).unwrap().strict);
        // general element: strict iff its modulus is
        assert!(is_strict(&CMatrix::diag_real(&[-0.5, 0.2]), &t).unwrap().strict);
    }

    #[test]
    fn polar_examples() {
        let t = tol();
        let (u, m) = polar_unitary(&CMatrix::diag_real(&[-1.0, 2.0]), &t).unwrap();
        assert!(close(u.matrix(), &CMatrix::diag_real(&[-1.0, 1.0]), 1e-15));
        assert!(close(m.matrix(), &CMatrix::diag_real(&[1.0, 2.0]), 1e-15));

        let (u, m) = polar_unitary(&CMatrix::zeros(3), &t).unwrap();
        assert!(close(u.matrix(), &CMatrix::identity(3), 0.0));
        assert!(close(m.matrix(), &CMatrix::zeros(3), 0.0));

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let w = CMatrix::from_fn(2, |i, j| match (i, j) {
            (0, 0) => Complex64::new(s, 0.0),
            (0, 1) => Complex64::new(0.0, s),
            (1, 0) => Complex64::new(0.0, s),
            _ => Complex64::new(s, 0.0),
        });
        let (u, m) = polar_unitary(&w, &t).unwrap();
        assert!(close(u.matrix(), &w, 1e-14));
        assert!(close(m.matrix(), &CMatrix::identity(2), 1e-14));
    }

    #[test]
    fn polar_singular_completion() {
        let t = tol();
        // rank one: maps e0 to e1, kills e1
        let x = CMatrix::from_real_rows(&[&[0.0, 0.0], &[3.0, 0.0]]);
        let (u, m) = polar_unitary(&x, &t).unwrap();
        assert!(unitarity_defect(u.matrix()).unwrap() < 1e-14);
        assert!(close(&(u.matrix() * m.matrix()), &x, 1e-14));
        // kernel e1 is sent to the first standard vector outside span{e1}, i.e. e0
        assert!(close(u.matrix(), &CMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]), 1e-14));
    }

    #[test]
    fn jordan_examples() {
        let t = tol();
        let a = Hermitian::new(CMatrix::diag_real(&[0.2, 0.5]), &t).unwrap();
        let b = Hermitian::new(CMatrix::diag_real(&[0.3, 0.1]), &t).unwrap();
        let ab = jordan_product(&a, &b).unwrap();
        assert!(close(ab.matrix(), &(a.matrix() * b.matrix()), 0.0));
        let aa = jordan_product(&a, &a).unwrap();
        assert!(close(aa.matrix(), &(a.matrix() * a.matrix()), 0.0));
        let c = Hermitian::new(CMatrix::zeros(3), &t).unwrap();
        assert_eq!(jordan_product(&a, &c), Err(Error::DimensionMismatch(2, 3)));
    }

    #[test]
    fn eig_is_deterministic() {
        let m =
            CMatrix::from_fn(5, |i, j| Complex64::new(((i + 1) * (j + 2)) as f64 % 7.0, (i as f64 - j as f64) * 0.3));
        let h = Hermitian::from_parts(&m);
        let a = h.eig().unwrap();
        let b = h.eig().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn projection_constructor_checks() {
        let t = tol();
        assert!(Projection::new(CMatrix::diag_real(&[1.0, 0.0]), &t).is_ok());
        assert!(matches!(Projection::new(CMatrix::diag_real(&[1.0, 0.5]), &t), Err(Error::NotProjection(_))));
        assert!(matches!(Effect::new(CMatrix::diag_real(&[1.5, 0.0]), &t), Err(Error::NotEffect { .. })));
        assert!(matches!(Unitary::new(CMatrix::scalar(2, 2.0), &t), Err(Error::NotUnitary(_))));
    }
}
