//! The 2×2 case on the Bloch ball.
//!
//! Unit-trace 2×2 effects `[[a, α], [ᾱ, 1 − a]]` correspond to points
//! `(a, Re α, Im α)` of the closed ball `B` of radius 1/2 around
//! `(1/2, 0, 0)`; rank-one projections are exactly its boundary sphere `B_d`.
//! A strict compatible pair is `A = (1 − λ) P + λ Q`, `B = (1 − λ) P + λ Q′`
//! for rank-one projections `P ∉ {Q, Q′}`. Both `A` and `B` lie on the
//! *pivotal sphere* of index `λ`: the sphere with diameter from `P` to
//! `M = (1 − λ) P + λ P′`, internally tangent to `B_d` at `P`.

use std::ops::{Add, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::compat::is_abs_compatible;
use crate::error::{Error, Result};
use crate::hermitian::{abs_op, is_strict, Effect, Hermitian, Projection};
use crate::matrix::CMatrix;
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Center of the Bloch ball, the image of `I/2`.
pub const BALL_CENTER: BlochPoint = BlochPoint { x: 0.5, y: 0.0, z: 0.0 };
pub const BALL_RADIUS: f64 = 0.5;

impl BlochPoint {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn scale(self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn dist(self, o: Self) -> f64 {
        (self - o).norm()
    }

    /// Image of `I − X`: reflection through the ball center.
    pub fn antipode(self) -> Self {
        BALL_CENTER.scale(2.0) - self
    }

    /// `(1 − t)·self + t·o`.
    pub fn lerp(self, o: Self, t: f64) -> Self {
        self + (o - self).scale(t)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn as_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for BlochPoint {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for BlochPoint {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

fn ensure_2x2(x: &CMatrix) -> Result<()> {
    if x.n() != 2 {
        return Err(Error::Shape(format!("expected a 2×2 matrix, got {0}×{0}", x.n())));
    }
    Ok(())
}

fn det2(x: &CMatrix) -> f64 {
    (x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)]).re
}

/// Reads `(a, Re α, Im α)` off a unit-trace 2×2 effect.
pub fn bloch_map(x: &CMatrix, tol: &Tolerances) -> Result<BlochPoint> {
    ensure_2x2(x)?;
    let h = Hermitian::new(x.clone(), tol)?;
    let x = h.matrix();
    let tr = x.trace().re;
    if (tr - 1.0).abs() > tol.geo {
        return Err(Error::TraceNotOne(tr));
    }
    let det = det2(x);
    if det < -tol.geo || det > 0.25 + tol.geo {
        return Err(Error::DetOutOfRange(det));
    }
    Ok(BlochPoint::new(x[(0, 0)].re, x[(0, 1)].re, x[(0, 1)].im))
}

pub fn bloch_inverse(pt: BlochPoint, tol: &Tolerances) -> Result<Effect> {
    let r = pt.dist(BALL_CENTER);
    if !pt.is_finite() || r * r > 0.25 + tol.geo {
        return Err(Error::OutsideBall(r));
    }
    Effect::new(bloch_matrix(pt), tol)
}

/// `[[x, y + iz], [y − iz, 1 − x]]` without any range check.
pub fn bloch_matrix(pt: BlochPoint) -> CMatrix {
    let off = Complex64::new(pt.y, pt.z);
    CMatrix::from_rows(vec![vec![Complex64::new(pt.x, 0.0), off], vec![off.conj(), Complex64::new(1.0 - pt.x, 0.0)]])
        .expect("2×2 finite rows")
}

/// Rank-one projection for a point of `B_d`.
pub fn projection_at(pt: BlochPoint, tol: &Tolerances) -> Result<Projection> {
    let r = pt.dist(BALL_CENTER);
    if (r - BALL_RADIUS).abs() > tol.geo {
        return Err(Error::NotOnSphere(r - BALL_RADIUS));
    }
    Projection::new(bloch_matrix(pt), tol)
}

/// `0 < det X < 1/4`, `tr X = 1`, `X ≥ 0`, all with margin `tol.geo`.
#[allow(non_snake_case)]
pub fn in_S(x: &CMatrix, tol: &Tolerances) -> bool {
    if x.n() != 2 || x.hermitian_defect() > tol.herm {
        return false;
    }
    let h = x.hermitian_part();
    if (h.trace().re - 1.0).abs() > tol.geo {
        return false;
    }
    let det = det2(&h);
    // trace 1 with positive det forces both eigenvalues positive
    det > tol.geo && det < 0.25 - tol.geo
}

/// Boundary equation `(x − 1/2)² + y² + z² = 1/4` within `tol.geo`.
pub fn on_boundary(pt: BlochPoint, tol: &Tolerances) -> bool {
    (pt.dist(BALL_CENTER) - BALL_RADIUS).abs() <= tol.geo
}

/// `(P, Q, λ)` with `P`, `Q` rank-one 2×2 projections.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSpecM2 {
    pub p: Projection,
    pub q: Projection,
    pub lambda: f64,
}

impl PairSpecM2 {
    pub fn new(p: Projection, q: Projection, lambda: f64, tol: &Tolerances) -> Result<Self> {
        for (name, x) in [("P", &p), ("Q", &q)] {
            ensure_2x2(x.matrix())?;
            let tr = x.matrix().trace().re;
            if (tr - 1.0).abs() > tol.geo {
                return Err(Error::DegenerateSpec(format!("{name} has trace {tr}, not rank one")));
            }
        }
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(Error::DegenerateSpec(format!("lambda = {lambda} not in (0, 1)")));
        }
        let to_q = (p.matrix() - q.matrix()).max_abs();
        let to_qp = (p.matrix() - q.complement().matrix()).max_abs();
        if to_q <= tol.proj || to_qp <= tol.proj {
            return Err(Error::DegenerateSpec("P coincides with Q or I − Q".into()));
        }
        Ok(Self { p, q, lambda })
    }

    /// Builds the spec from Bloch points of `P` and `Q` on `B_d`.
    pub fn from_points(p: BlochPoint, q: BlochPoint, lambda: f64, tol: &Tolerances) -> Result<Self> {
        let proj = |pt: BlochPoint| projection_at(pt, tol).map_err(|e| Error::DegenerateSpec(e.to_string()));
        Self::new(proj(p)?, proj(q)?, lambda, tol)
    }

    pub fn p_point(&self) -> BlochPoint {
        point_of(self.p.matrix())
    }

    pub fn q_point(&self) -> BlochPoint {
        point_of(self.q.matrix())
    }

    /// Largest deviation from another spec in `λ` and the entries of `P`, `Q`.
    pub fn distance(&self, other: &Self) -> f64 {
        (self.lambda - other.lambda)
            .abs()
            .max((self.p.matrix() - other.p.matrix()).max_abs())
            .max((self.q.matrix() - other.q.matrix()).max_abs())
    }
}

/// Coordinates of a 2×2 matrix with no validation.
fn point_of(x: &CMatrix) -> BlochPoint {
    BlochPoint::new(x[(0, 0)].re, x[(0, 1)].re, x[(0, 1)].im)
}

/// `(1 − λ) P + λ X` as a matrix.
fn affine(p: &CMatrix, x: &CMatrix, lambda: f64) -> CMatrix {
    &p.scale(1.0 - lambda) + &x.scale(lambda)
}

/// `A = (1 − λ) P + λ Q`, `B = (1 − λ) P + λ Q′`.
pub fn pair_from_projections(spec: &PairSpecM2, tol: &Tolerances) -> Result<(Effect, Effect)> {
    let a = Effect::new(affine(spec.p.matrix(), spec.q.matrix(), spec.lambda), tol)?;
    let b = Effect::new(affine(spec.p.matrix(), spec.q.complement().matrix(), spec.lambda), tol)?;
    for (name, x) in [("A", &a), ("B", &b)] {
        let r = is_strict(x.matrix(), tol)?;
        if !r.strict {
            return Err(Error::NotStrict(format!(
                "{name} has spectrum [{:.6e}, {:.6e}]",
                r.min_modulus, r.max_modulus
            )));
        }
    }
    let report = is_abs_compatible(&a, &b, tol)?;
    if !report.compatible {
        return Err(Error::NotAbsolutelyCompatible(report.residual));
    }
    Ok((a, b))
}

/// Projection onto the top eigenvector of a 2×2 Hermitian matrix.
fn top_projection(h: &CMatrix, tol: &Tolerances) -> Result<Projection> {
    let sd = Hermitian::from_parts(h).eig()?;
    Projection::new(CMatrix::outer_sum(&[sd.column(1)], &[1.0], 2), tol)
}

/// Recovers `(P, Q, λ)` from a strict compatible 2×2 pair.
///
/// `|A − B| = λ I`, `A + B = (2 − λ) P + λ P′`, so `P` is the top spectral
/// projection of `A + B` and `Q = (A − (1 − λ) P) / λ`.
pub fn decompose_pair_m2(a: &Effect, b: &Effect, tol: &Tolerances) -> Result<PairSpecM2> {
    ensure_2x2(a.matrix())?;
    ensure_2x2(b.matrix())?;
    for (name, x) in [("A", a), ("B", b)] {
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
    let m = abs_op(&(a.matrix() - b.matrix()), tol)?.eig()?;
    let gap = m.values[1] - m.values[0];
    if gap > tol.cluster {
        return Err(Error::SpectralAmbiguity(gap));
    }
    let lambda = 0.5 * (m.values[0] + m.values[1]);
    let p = top_projection(&(a.matrix() + b.matrix()), tol)?;
    let q_raw = (a.matrix() - &p.matrix().scale(1.0 - lambda)).scale(1.0 / lambda);
    let q = top_projection(&q_raw.hermitian_part(), tol)?;
    PairSpecM2::new(p, q, lambda, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PivotalSphere {
    pub pivot: BlochPoint,
    pub index: f64,
    pub center: BlochPoint,
    pub radius: f64,
}

/// The sphere of index `λ` pivoted at a rank-one projection.
pub fn pivotal_sphere(pivot: &Projection, lambda: f64, tol: &Tolerances) -> Result<PivotalSphere> {
    ensure_2x2(pivot.matrix())?;
    let p = point_of(pivot.matrix());
    if !on_boundary(p, tol) {
        return Err(Error::DegenerateSpec("pivot is not a rank-one projection".into()));
    }
    sphere_at(p, lambda)
}

fn sphere_at(p: BlochPoint, lambda: f64) -> Result<PivotalSphere> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::DegenerateSpec(format!("lambda = {lambda} not in (0, 1)")));
    }
    let pp = p.antipode();
    Ok(PivotalSphere { pivot: p, index: lambda, center: p.lerp(pp, lambda / 2.0), radius: lambda / 2.0 * p.dist(pp) })
}

impl PivotalSphere {
    /// `M = (1 − λ) P + λ P′`, the point diametrically opposite the pivot.
    pub fn far_point(&self) -> BlochPoint {
        self.pivot.lerp(self.pivot.antipode(), self.index)
    }

    pub fn contains(&self, pt: BlochPoint, tol: &Tolerances) -> bool {
        (pt.dist(self.center) - self.radius).abs() <= tol.geo
    }

    pub fn antipode_of(&self, pt: BlochPoint) -> BlochPoint {
        self.center.scale(2.0) - pt
    }

    /// `|c_B − c_λ| − (1/2 − λ/2)`.
    pub fn tangency_residual(&self) -> f64 {
        (BALL_CENTER.dist(self.center) - (BALL_RADIUS - self.radius)).abs()
    }

    /// `count` points spread over the sphere on a Fibonacci lattice.
    pub fn sample(&self, count: usize) -> Vec<BlochPoint> {
        let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
        (0..count)
            .map(|i| {
                let t = (i as f64 + 0.5) / count as f64;
                let z = 1.0 - 2.0 * t;
                let r = (1.0 - z * z).sqrt();
                let phi = golden * i as f64;
                self.center + BlochPoint::new(r * phi.cos(), r * phi.sin(), z).scale(self.radius)
            })
            .collect()
    }
}

/// `C = (1 − λ) P + λ R` for a point `C` of the sphere: returns `R` and
/// `R′ = I − R`, both on `B_d`.
pub fn point_bijection(sphere: &PivotalSphere, c: BlochPoint, tol: &Tolerances) -> Result<(BlochPoint, BlochPoint)> {
    if !sphere.contains(c, tol) {
        return Err(Error::NotOnSphere(c.dist(sphere.center) - sphere.radius));
    }
    let r = sphere.pivot + (c - sphere.pivot).scale(1.0 / sphere.index);
    Ok((r, r.antipode()))
}

/// Inverse of [`point_bijection`]: from `R ∈ B_d` to the antipodal pair
/// `C = (1 − λ) P + λ R`, `D = (1 − λ) P + λ R′` on the sphere.
pub fn points_from_boundary(
    sphere: &PivotalSphere,
    r: BlochPoint,
    tol: &Tolerances,
) -> Result<(BlochPoint, BlochPoint)> {
    if !on_boundary(r, tol) {
        return Err(Error::NotOnSphere(r.dist(BALL_CENTER) - BALL_RADIUS));
    }
    Ok((sphere.pivot.lerp(r, sphere.index), sphere.pivot.lerp(r.antipode(), sphere.index)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryPoints {
    #[serde(rename = "P")]
    pub p: BlochPoint,
    #[serde(rename = "Pp")]
    pub pp: BlochPoint,
    #[serde(rename = "Q")]
    pub q: BlochPoint,
    #[serde(rename = "Qp")]
    pub qp: BlochPoint,
    #[serde(rename = "A")]
    pub a: BlochPoint,
    #[serde(rename = "B")]
    pub b: BlochPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryResiduals {
    /// `|c_B − c_λ| − (1/2 − λ/2)`.
    pub tangency: f64,
    /// Distance of `A`, `B` from the plane through `P`, `P′`, `Q`.
    pub coplanarity: f64,
    /// `|(A − B) × (Q − Q′)| / (|A − B| |Q − Q′|)`.
    pub parallelism: f64,
    /// `(A − P)·(B − P)`.
    pub right_angle: f64,
    /// `|mid(A, B) − c_λ|`.
    pub antipodality: f64,
}

impl GeometryResiduals {
    pub fn max(&self) -> f64 {
        [self.tangency, self.coplanarity, self.parallelism, self.right_angle.abs(), self.antipodality]
            .into_iter()
            .fold(0.0, f64::max)
    }

    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("tangency", self.tangency),
            ("coplanarity", self.coplanarity),
            ("parallelism", self.parallelism),
            ("right_angle", self.right_angle.abs()),
            ("antipodality", self.antipodality),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ball {
    pub center: BlochPoint,
    pub radius: f64,
}

/// Geometry export: `{"ball", "pivotal", "points", "residuals"}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometryReport {
    pub ball: Ball,
    pub pivotal: PivotalSphere,
    pub points: GeometryPoints,
    pub residuals: GeometryResiduals,
}

pub fn geometry_report(spec: &PairSpecM2, tol: &Tolerances) -> Result<GeometryReport> {
    let lambda = spec.lambda;
    let p = spec.p_point();
    let q = spec.q_point();
    let pp = p.antipode();
    let qp = q.antipode();
    let a = p.lerp(q, lambda);
    let b = p.lerp(qp, lambda);
    let sphere = pivotal_sphere(&spec.p, lambda, tol)?;

    // σ_min of [P′−P, Q−P, A−P, B−P] is bounded by the plane-normal residual
    let normal = (pp - p).cross(q - p);
    let nn = normal.norm();
    if nn <= tol.geo {
        return Err(Error::DegenerateSpec("P, P′ and Q are collinear".into()));
    }
    let unit = normal.scale(1.0 / nn);
    let coplanarity = [pp - p, q - p, a - p, b - p].iter().map(|v| v.dot(unit).powi(2)).sum::<f64>().sqrt();

    let ab = a - b;
    let qq = q - qp;
    let parallelism = ab.cross(qq).norm() / (ab.norm() * qq.norm());

    Ok(GeometryReport {
        ball: Ball { center: BALL_CENTER, radius: BALL_RADIUS },
        pivotal: sphere,
        points: GeometryPoints { p, pp, q, qp, a, b },
        residuals: GeometryResiduals {
            tangency: sphere.tangency_residual(),
            coplanarity,
            parallelism,
            right_angle: (a - p).dot(b - p),
            antipodality: a.lerp(b, 0.5).dist(sphere.center),
        },
    })
}

/// For `A` strictly inside the ball and a pivot `P ∈ B_d`, the unique
/// `(λ, Q)` with `A = (1 − λ) P + λ Q`, `Q ∈ B_d`. The matching partner is
/// `(1 − λ) P + λ Q′`.
pub fn decomposition_through(a: BlochPoint, pivot: BlochPoint, tol: &Tolerances) -> Result<(f64, BlochPoint)> {
    let d = a - BALL_CENTER;
    if d.norm() >= BALL_RADIUS - tol.geo {
        return Err(Error::OutsideBall(d.norm()));
    }
    if !on_boundary(pivot, tol) {
        return Err(Error::NotOnSphere(pivot.dist(BALL_CENTER) - BALL_RADIUS));
    }
    let ph = pivot - BALL_CENTER;
    // |Q − c| = 1/2 is linear in λ after expanding
    let lambda = (a - pivot).dot(a - pivot) / (0.5 - 2.0 * d.dot(ph));
    let q = (a - pivot.scale(1.0 - lambda)).scale(1.0 / lambda);
    Ok((lambda, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpheroidStats {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub max: f64,
    /// `(max − min) / mean`.
    pub relative_spread: f64,
}

/// Focal sums `|X − A| + |X − A′|` over the Bloch points `X` of partners
/// compatible with `A`.
pub fn spheroid_residual(a: &Effect, partners: &[Effect], tol: &Tolerances) -> Result<SpheroidStats> {
    if partners.is_empty() {
        return Err(Error::EmptyInput);
    }
    let pa = bloch_map(a.matrix(), tol)?;
    let pa2 = pa.antipode();
    let mut sums = Vec::with_capacity(partners.len());
    for x in partners {
        let report = is_abs_compatible(a, x, tol)?;
        if !report.compatible {
            return Err(Error::NotAbsolutelyCompatible(report.residual));
        }
        let px = bloch_map(x.matrix(), tol)?;
        sums.push(px.dist(pa) + px.dist(pa2));
    }
    let min = sums.iter().copied().fold(f64::INFINITY, f64::min);
    let max = sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mean = sums.iter().sum::<f64>() / sums.len() as f64;
    Ok(SpheroidStats { count: sums.len(), mean, min, max, relative_spread: (max - min) / mean })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn fixture_spec() -> PairSpecM2 {
        let t = tol();
        let p = Projection::new(CMatrix::diag_real(&[0.0, 1.0]), &t).unwrap();
        let q = Projection::new(CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]), &t).unwrap();
        PairSpecM2::new(p, q, 0.5, &t).unwrap()
    }

    #[test]
    fn bloch_map_examples() {
        let t = tol();
        assert_eq!(bloch_map(&CMatrix::diag_real(&[1.0, 0.0]), &t).unwrap(), BlochPoint::new(1.0, 0.0, 0.0));
        assert_eq!(bloch_map(&CMatrix::scalar(2, 0.5), &t).unwrap(), BALL_CENTER);
        let h = CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]);
        let pt = bloch_map(&h, &t).unwrap();
        assert_eq!(pt, BlochPoint::new(0.5, 0.5, 0.0));
        assert!(on_boundary(pt, &t));
        assert!(matches!(bloch_map(&CMatrix::identity(2), &t), Err(Error::TraceNotOne(_))));
        let outside = CMatrix::from_real_rows(&[&[0.5, 1.0], &[1.0, 0.5]]);
        assert!(matches!(bloch_map(&outside, &t), Err(Error::DetOutOfRange(_))));
    }

    #[test]
    fn bloch_inverse_examples() {
        let t = tol();
        let p0 = bloch_inverse(BlochPoint::new(0.0, 0.0, 0.0), &t).unwrap();
        assert_eq!(p0.matrix(), &CMatrix::diag_real(&[0.0, 1.0]));
        let h = bloch_inverse(BlochPoint::new(0.5, 0.5, 0.0), &t).unwrap();
        assert_eq!(h.matrix(), &CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]));
        assert!(matches!(bloch_inverse(BlochPoint::new(1.0, 1.0, 1.0), &t), Err(Error::OutsideBall(_))));
    }

    #[test]
    fn in_s_examples() {
        let t = tol();
        assert!(!in_S(&CMatrix::scalar(2, 0.5), &t));
        assert!(in_S(&CMatrix::from_real_rows(&[&[0.25, 0.25], &[0.25, 0.75]]), &t));
        assert!(!in_S(&CMatrix::from_real_rows(&[&[0.5, 0.5], &[0.5, 0.5]]), &t));
    }

    #[test]
    fn pair_from_fixture_spec() {
        let t = tol();
        let (a, b) = pair_from_projections(&fixture_spec(), &t).unwrap();
        assert!((a.matrix() - &CMatrix::from_real_rows(&[&[0.25, 0.25], &[0.25, 0.75]])).max_abs() < 1e-16);
        assert!((b.matrix() - &CMatrix::from_real_rows(&[&[0.25, -0.25], &[-0.25, 0.75]])).max_abs() < 1e-16);
    }

    #[test]
    fn degenerate_specs_rejected() {
        let t = tol();
        let s = fixture_spec();
        assert!(matches!(PairSpecM2::new(s.p.clone(), s.p.clone(), 0.5, &t), Err(Error::DegenerateSpec(_))));
        assert!(matches!(PairSpecM2::new(s.p.clone(), s.p.complement(), 0.5, &t), Err(Error::DegenerateSpec(_))));
        assert!(matches!(PairSpecM2::new(s.p.clone(), s.q.clone(), 1.0, &t), Err(Error::DegenerateSpec(_))));
    }

    #[test]
    fn decompose_recovers_fixture() {
        let t = tol();
        let spec = fixture_spec();
        let (a, b) = pair_from_projections(&spec, &t).unwrap();
        let back = decompose_pair_m2(&a, &b, &t).unwrap();
        assert!(back.distance(&spec) < 1e-14, "{}", back.distance(&spec));
        assert!(matches!(decompose_pair_m2(&a, &a, &t), Err(Error::NotAbsolutelyCompatible(_))));
        let p = Effect::new(CMatrix::diag_real(&[0.0, 1.0]), &t).unwrap();
        assert!(matches!(decompose_pair_m2(&p, &p.complement(), &t), Err(Error::NotStrict(_))));
    }

    #[test]
    fn pivotal_sphere_examples() {
        let t = tol();
        let p0 = Projection::new(CMatrix::diag_real(&[0.0, 1.0]), &t).unwrap();
        let s = pivotal_sphere(&p0, 0.5, &t).unwrap();
        assert!(s.center.dist(BlochPoint::new(0.25, 0.0, 0.0)) < 1e-16);
        assert!((s.radius - 0.25).abs() < 1e-16);
        let p1 = p0.complement();
        let s = pivotal_sphere(&p1, 0.5, &t).unwrap();
        assert!(s.center.dist(BlochPoint::new(0.75, 0.0, 0.0)) < 1e-16);
        assert!(matches!(pivotal_sphere(&p0, 1.0, &t), Err(Error::DegenerateSpec(_))));
    }

    #[test]
    fn fixture_report_residuals_vanish() {
        let t = tol();
        let r = geometry_report(&fixture_spec(), &t).unwrap();
        for (name, v) in r.residuals.named() {
            assert!(v <= 1e-12, "{name} = {v}");
        }
        let json = serde_json::to_value(r).unwrap();
        for key in ["ball", "pivotal", "points", "residuals"] {
            assert!(json.get(key).is_some());
        }
        assert!(json["points"].get("Qp").is_some());
    }

    #[test]
    fn point_bijection_examples() {
        let t = tol();
        let spec = fixture_spec();
        let s = pivotal_sphere(&spec.p, spec.lambda, &t).unwrap();
        let (r, _) = point_bijection(&s, s.far_point(), &t).unwrap();
        assert!(r.dist(spec.p_point().antipode()) < 1e-15);
        let a = spec.p_point().lerp(spec.q_point(), spec.lambda);
        let (r, rp) = point_bijection(&s, a, &t).unwrap();
        assert!(r.dist(spec.q_point()) < 1e-15);
        let (c, d) = points_from_boundary(&s, r, &t).unwrap();
        assert!(c.dist(a) < 1e-15);
        assert!(d.dist(spec.p_point().lerp(rp, spec.lambda)) < 1e-15);
        assert!(d.dist(s.antipode_of(c)) < 1e-15);
        let (r, _) = point_bijection(&s, s.pivot, &t).unwrap();
        assert_eq!(r, s.pivot);
        assert!(matches!(point_bijection(&s, s.center, &t), Err(Error::NotOnSphere(_))));
    }

    #[test]
    fn spheroid_examples() {
        let t = tol();
        let (a, b) = pair_from_projections(&fixture_spec(), &t).unwrap();
        let stats = spheroid_residual(&a, std::slice::from_ref(&b), &t).unwrap();
        assert_eq!(stats.relative_spread, 0.0);
        assert!(matches!(spheroid_residual(&a, &[], &t), Err(Error::EmptyInput)));
        assert!(matches!(spheroid_residual(&a, std::slice::from_ref(&a), &t), Err(Error::NotAbsolutelyCompatible(_))));
    }

    #[test]
    fn partners_through_pivots_share_focal_sum() {
        let t = tol();
        let a = BlochPoint::new(0.3, 0.1, -0.05);
        let mut partners = Vec::new();
        for k in 0..12 {
            let th = 0.4 + 0.5 * k as f64;
            let ph = 1.3 * k as f64;
            let pivot = BALL_CENTER + BlochPoint::new(th.cos(), th.sin() * ph.cos(), th.sin() * ph.sin()).scale(0.5);
            let (lambda, q) = decomposition_through(a, pivot, &t).unwrap();
            assert!(on_boundary(q, &t));
            assert!(lambda > 0.0 && lambda < 1.0);
            partners.push(bloch_inverse(pivot.lerp(q.antipode(), lambda), &t).unwrap());
        }
        let a = bloch_inverse(a, &t).unwrap();
        let stats = spheroid_residual(&a, &partners, &t).unwrap();
        assert!((stats.mean - 1.0).abs() < 1e-12);
        assert!(stats.relative_spread < 1e-12);
    }

    #[test]
    fn sample_points_lie_on_sphere() {
        let t = tol();
        let s = pivotal_sphere(&fixture_spec().p, 0.3, &t).unwrap();
        let pts = s.sample(64);
        assert_eq!(pts.len(), 64);
        assert!(pts.iter().all(|&p| s.contains(p, &t)));
    }
}
