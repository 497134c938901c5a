//! Seeded generators for random instances.
//!
//! Every generator is a pure function of its arguments and a `u64` seed. The
//! stream is ChaCha8 seeded through `seed_from_u64`; Gaussians come from
//! Box–Muller on that stream. Campaigns derive per-trial seeds with
//! [`trial_seed`] so trials can run in any order or in parallel.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::canonical::{canonical_pair, StrictProjectionParams, StrictUnitaryParams};
use crate::compat::Block;
use crate::error::{Error, Result};
use crate::geometry::{BlochPoint, PairSpecM2, BALL_CENTER, BALL_RADIUS};
use crate::hermitian::{Effect, Projection, Unitary};
use crate::m2diag::{Block2, M2OverDiag};
use crate::matrix::{dot, vec_norm, CMatrix};
use crate::Tolerances;

pub const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

/// `base ⊕ (i · 0x9E3779B97F4A7C15)` (wrapping).
pub fn trial_seed(base: u64, i: u64) -> u64 {
    base ^ i.wrapping_mul(SEED_STRIDE)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut impl Rng) -> f64 {
    // 1 − U keeps the log argument in (0, 1]
    let u1 = 1.0 - rng.random::<f64>();
    let u2 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (TAU * u2).cos()
}

/// Standard complex Gaussian: real and imaginary parts each `N(0, 1/2)`.
pub fn complex_gaussian(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn unit_phase(rng: &mut impl Rng) -> Complex64 {
    Complex64::from_polar(1.0, TAU * rng.random::<f64>())
}

pub fn uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

fn check_margin(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 0.5 {
        Ok(())
    } else {
        Err(Error::BadMargin(delta))
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Shape("dimension must be at least 1".into()));
    }
    Ok(())
}

pub fn haar_unitary_with(rng: &mut impl Rng, n: usize) -> Unitary {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| complex_gaussian(rng)).collect();
        for _ in 0..2 {
            for c in &cols {
                let proj = dot(c, &v);
                for (vi, ci) in v.iter_mut().zip(c) {
                    *vi -= ci * proj;
                }
            }
        }
        let norm = vec_norm(&v);
        // a Gaussian column in the span of the others has probability zero,
        // but redraw rather than divide by a tiny norm
        if norm < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    Unitary::from_parts(CMatrix::from_columns(&cols))
}

/// Q factor of a complex Gaussian matrix, with positive `R` diagonal.
pub fn haar_unitary(n: usize, seed: u64) -> Result<Unitary> {
    check_dim(n)?;
    Ok(haar_unitary_with(&mut rng(seed), n))
}

fn conjugated_diag(u: &Unitary, values: &[f64]) -> CMatrix {
    u.conjugate(&CMatrix::diag_real(values)).hermitian_part()
}

/// `U diag(λ) U*` with `λ` uniform in `[δ, 1 − δ]` and `U` Haar.
pub fn random_strict_effect(n: usize, seed: u64, delta: f64) -> Result<Effect> {
    check_margin(delta)?;
    check_dim(n)?;
    let mut r = rng(seed);
    let values: Vec<f64> = (0..n).map(|_| uniform(&mut r, delta, 1.0 - delta)).collect();
    let u = haar_unitary_with(&mut r, n);
    Effect::new(conjugated_diag(&u, &values), &Tolerances::default())
}

/// Effect with spectrum uniform in `[0, 1]` (not necessarily strict).
pub fn random_effect_with(rng: &mut impl Rng, n: usize) -> Effect {
    let values: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let u = haar_unitary_with(rng, n);
    Effect::new(conjugated_diag(&u, &values), &Tolerances::default()).expect("spectrum in [0, 1]")
}

/// Shared Haar eigenbasis, eigenvalue pairs with `α, β ≥ δ` and
/// `α² + β² ≤ 1 − δ`.
pub fn random_commuting_strict_pair(n: usize, seed: u64, delta: f64) -> Result<(Effect, Effect)> {
    check_margin(delta)?;
    check_dim(n)?;
    let mut r = rng(seed);
    let mut alpha = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    for _ in 0..n {
        let x = uniform(&mut r, delta, (1.0 - delta - delta * delta).sqrt());
        let y = uniform(&mut r, delta, (1.0 - delta - x * x).sqrt());
        // alternate which coordinate is drawn first
        if r.random::<bool>() {
            alpha.push(x);
            beta.push(y);
        } else {
            alpha.push(y);
            beta.push(x);
        }
    }
    let u = haar_unitary_with(&mut r, n);
    let tol = Tolerances::default();
    Ok((Effect::new(conjugated_diag(&u, &alpha), &tol)?, Effect::new(conjugated_diag(&u, &beta), &tol)?))
}

/// A generated strict compatible pair together with the data it was built
/// from: `a = U·A·U*`, `b = U·B·U*` with `(A, B)` the canonical pair of
/// `(x0, p)`.
#[derive(Debug, Clone)]
pub struct AbsCompatInstance {
    pub a: Effect,
    pub b: Effect,
    pub x0: Vec<f64>,
    pub p: StrictProjectionParams,
    pub u: Unitary,
}

pub fn random_abscompat_pair(n: usize, seed: u64, delta: f64) -> Result<AbsCompatInstance> {
    check_margin(delta)?;
    if n == 0 || !n.is_multiple_of(2) {
        return Err(Error::OddDimension(n));
    }
    let m = n / 2;
    let mut r = rng(seed);
    let x0: Vec<f64> = (0..m).map(|_| uniform(&mut r, delta, 1.0 - delta)).collect();
    let p = StrictProjectionParams {
        a0: (0..m).map(|_| uniform(&mut r, delta, 1.0 - delta)).collect(),
        w: (0..m).map(|_| unit_phase(&mut r)).collect(),
    };
    let u = haar_unitary_with(&mut r, n);
    let tol = Tolerances::default();
    let (a0, b0) = canonical_pair(&x0, &p, &tol)?;
    let a = Effect::new(u.conjugate(a0.matrix()).hermitian_part(), &tol)?;
    let b = Effect::new(u.conjugate(b0.matrix()).hermitian_part(), &tol)?;
    Ok(AbsCompatInstance { a, b, x0, p, u })
}

/// `ab = 0`: `a` and `b` live on disjoint groups of Haar basis vectors, with
/// eigenvalues in `(0, 1]`. Some basis vectors may belong to neither.
pub fn random_orthogonal_pair(n: usize, seed: u64) -> Result<(Effect, Effect)> {
    check_dim(n)?;
    let mut r = rng(seed);
    let mut alpha = vec![0.0; n];
    let mut beta = vec![0.0; n];
    for k in 0..n {
        let v = 1.0 - r.random::<f64>();
        match r.random_range(0..3) {
            0 => alpha[k] = v,
            1 => beta[k] = v,
            _ => {}
        }
    }
    let u = haar_unitary_with(&mut r, n);
    let tol = Tolerances::default();
    Ok((Effect::new(conjugated_diag(&u, &alpha), &tol)?, Effect::new(conjugated_diag(&u, &beta), &tol)?))
}

/// A projection and an effect that commute when `commuting` is set (the
/// effect is block diagonal for `p ⊕ (I − p)`) and are unrelated otherwise.
/// Rank of `p` is uniform in `0..=n`.
pub fn random_projection_effect(n: usize, seed: u64, commuting: bool) -> Result<(Projection, Effect)> {
    check_dim(n)?;
    let mut r = rng(seed);
    let rank = r.random_range(0..=n);
    let mut mask = vec![0.0; n];
    mask[..rank].fill(1.0);
    let u = haar_unitary_with(&mut r, n);
    let p = Projection::new(conjugated_diag(&u, &mask), &Tolerances::default())?;
    let a = if commuting {
        // random effects on each block, embedded in the basis of u
        let upper = random_effect_with(&mut r, n);
        let lower = random_effect_with(&mut r, n);
        let mut inner = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let same = (i < rank) == (j < rank);
                if same {
                    inner[(i, j)] = if i < rank { upper.matrix()[(i, j)] } else { lower.matrix()[(i, j)] };
                }
            }
        }
        // compressions of effects are effects
        Effect::new(u.conjugate(&inner).hermitian_part(), &Tolerances::default())?
    } else {
        random_effect_with(&mut r, n)
    };
    Ok((p, a))
}

/// A compatible pair assembled as a direct sum of scalar blocks (each with
/// one entry in `{0, 1}`) and strict 2×2 sites, then conjugated by a Haar
/// unitary. `expected_ranks` follows [`Block::ALL`].
#[derive(Debug, Clone)]
pub struct FiveBlockInstance {
    pub a: Effect,
    pub b: Effect,
    pub expected_ranks: [usize; 5],
}

/// `0`, `1`, or an interior value, each with fixed odds.
fn edge_or_interior(rng: &mut impl Rng, delta: f64) -> f64 {
    match rng.random_range(0..4) {
        0 => 0.0,
        1 => 1.0,
        _ => uniform(rng, delta, 1.0 - delta),
    }
}

/// Block a commuting scalar pair lands in, by the decomposition's priority.
fn scalar_block(a: f64, b: f64) -> Block {
    if a == 1.0 {
        Block::P1
    } else if b == 1.0 {
        Block::P2
    } else if a == 0.0 {
        Block::N1
    } else {
        Block::N2
    }
}

pub fn random_five_block_pair(
    scalar_blocks: usize,
    strict_sites: usize,
    seed: u64,
    delta: f64,
) -> Result<FiveBlockInstance> {
    check_margin(delta)?;
    if scalar_blocks + strict_sites == 0 {
        return Err(Error::EmptyInput);
    }
    let mut r = rng(seed);
    let mut ranks = [0usize; 5];
    let mut diag_a = Vec::new();
    let mut diag_b = Vec::new();
    for _ in 0..scalar_blocks {
        let free = edge_or_interior(&mut r, delta);
        let fixed = if r.random::<bool>() { 1.0 } else { 0.0 };
        let (a, b) = if r.random::<bool>() { (fixed, free) } else { (free, fixed) };
        ranks[scalar_block(a, b) as usize] += 1;
        diag_a.push(a);
        diag_b.push(b);
    }
    let k = diag_a.len();
    let n = k + 2 * strict_sites;
    let mut a = CMatrix::diag_real(&[diag_a, vec![0.0; 2 * strict_sites]].concat());
    let mut b = CMatrix::diag_real(&[diag_b, vec![0.0; 2 * strict_sites]].concat());
    if strict_sites > 0 {
        let inst = random_abscompat_pair(2 * strict_sites, r.random(), delta)?;
        for i in 0..2 * strict_sites {
            for j in 0..2 * strict_sites {
                a[(k + i, k + j)] = inst.a.matrix()[(i, j)];
                b[(k + i, k + j)] = inst.b.matrix()[(i, j)];
            }
        }
        ranks[Block::S as usize] = 2 * strict_sites;
    }
    let u = haar_unitary_with(&mut r, n);
    let tol = Tolerances::default();
    Ok(FiveBlockInstance {
        a: Effect::new(u.conjugate(&a).hermitian_part(), &tol)?,
        b: Effect::new(u.conjugate(&b).hermitian_part(), &tol)?,
        expected_ranks: ranks,
    })
}

/// Uniform point on the boundary sphere `B_d`.
pub fn random_sphere_point(rng: &mut impl Rng) -> BlochPoint {
    loop {
        let v = BlochPoint::new(gaussian(rng), gaussian(rng), gaussian(rng));
        let norm = v.norm();
        if norm > 1e-6 {
            return BALL_CENTER + v.scale(BALL_RADIUS / norm);
        }
    }
}

/// Random `(P, Q, λ)` with `λ ∈ [δ, 1 − δ]` and `Q` kept at Bloch distance
/// at least `δ` from both `P` and `P′`.
pub fn random_pair_spec(seed: u64, delta: f64) -> Result<PairSpecM2> {
    check_margin(delta)?;
    let mut r = rng(seed);
    let p = random_sphere_point(&mut r);
    let q = loop {
        let q = random_sphere_point(&mut r);
        if q.dist(p) >= delta && q.dist(p.antipode()) >= delta {
            break q;
        }
    };
    let lambda = uniform(&mut r, delta, 1.0 - delta);
    PairSpecM2::from_points(p, q, lambda, &Tolerances::default())
}

pub fn random_strict_projection_params(m: usize, seed: u64, delta: f64) -> Result<StrictProjectionParams> {
    check_margin(delta)?;
    check_dim(m)?;
    let mut r = rng(seed);
    Ok(StrictProjectionParams {
        a0: (0..m).map(|_| uniform(&mut r, delta, 1.0 - delta)).collect(),
        w: (0..m).map(|_| unit_phase(&mut r)).collect(),
    })
}

pub fn random_strict_unitary_params(m: usize, seed: u64, delta: f64) -> Result<StrictUnitaryParams> {
    check_margin(delta)?;
    check_dim(m)?;
    let mut r = rng(seed);
    let a0 = (0..m).map(|_| uniform(&mut r, delta, 1.0 - delta)).collect();
    let mut phases = || (0..m).map(|_| unit_phase(&mut r)).collect::<Vec<_>>();
    let (w1, w2, w3) = (phases(), phases(), phases());
    Ok(StrictUnitaryParams { a0, w1, w2, w3 })
}

/// Strict projection over `m` sites as an [`M2OverDiag`].
pub fn random_strict_projection(m: usize, seed: u64, delta: f64) -> Result<M2OverDiag> {
    let q = random_strict_projection_params(m, seed, delta)?;
    crate::canonical::strict_projection_from_params(&q, &Tolerances::default())
}

/// Independent Haar 2×2 unitary at each site.
pub fn random_site_unitary(m: usize, seed: u64) -> Result<M2OverDiag> {
    check_dim(m)?;
    let mut r = rng(seed);
    let sites = (0..m)
        .map(|_| {
            let u = haar_unitary_with(&mut r, 2);
            let x = u.matrix();
            Block2::new(x[(0, 0)], x[(0, 1)], x[(1, 0)], x[(1, 1)])
        })
        .collect();
    M2OverDiag::new(sites)
}
