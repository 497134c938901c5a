//! Absolute compatibility of effects.
//!
//! `a` and `b` are absolutely compatible when `|a − b| + |I − a − b| = I`.
//! Orthogonal effects (`ab = 0`) are exactly the compatible pairs with
//! `a + b ≤ I`, and a projection is compatible with an effect exactly when
//! the two commute; both equivalences are exposed so campaigns can check them
//! side by side.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hermitian::{abs_op, is_strict, null_n, op_norm, support_s, Effect, Hermitian, Projection};
use crate::matrix::CMatrix;
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompatReport {
    /// `‖ |a − b| + |I − a − b| − I ‖_op`.
    pub residual: f64,
    pub compatible: bool,
}

/// Residual of the compatibility identity on raw matrices.
///
/// The pair is put in a canonical order first (bitwise comparison of the
/// entries) so the result is exactly symmetric in its arguments.
pub fn compat_residual(a: &CMatrix, b: &CMatrix, tol: &Tolerances) -> Result<f64> {
    a.ensure_same_dim(b)?;
    let (a, b) = match a.bitwise_cmp(b) {
        std::cmp::Ordering::Greater => (b, a),
        _ => (a, b),
    };
    let n = a.n();
    let id = CMatrix::identity(n);
    let diff = abs_op(&(a - b), tol)?;
    let rest = abs_op(&(&(&id - a) - b), tol)?;
    let total = &(diff.matrix() + rest.matrix()) - &id;
    Hermitian::from_parts(&total).op_norm()
}

pub fn is_abs_compatible(a: &Effect, b: &Effect, tol: &Tolerances) -> Result<CompatReport> {
    let residual = compat_residual(a.matrix(), b.matrix(), tol)?;
    Ok(CompatReport { residual, compatible: residual <= tol.compat })
}

/// `ab = 0` up to `tol.compat` in operator norm. For positive `a`, `b` this
/// single condition is equivalent to `a*b = 0 = ab*`.
pub fn is_orthogonal(a: &Effect, b: &Effect, tol: &Tolerances) -> Result<bool> {
    a.matrix().ensure_same_dim(b.matrix())?;
    Ok(op_norm(&(a.matrix() * b.matrix()))? <= tol.compat)
}

/// `a + b ≤ I` up to `tol.spec`.
pub fn sum_below_identity(a: &Effect, b: &Effect, tol: &Tolerances) -> Result<bool> {
    a.matrix().ensure_same_dim(b.matrix())?;
    let sum = Hermitian::from_parts(&(a.matrix() + b.matrix()));
    Ok(sum.eig()?.max() <= 1.0 + tol.spec)
}

/// Both sides of the projection criterion: `(compatible(p, a), pa = ap)`.
pub fn projection_compat_equiv(p: &Projection, a: &Effect, tol: &Tolerances) -> Result<(bool, bool)> {
    let lhs = is_abs_compatible(p.effect(), a, tol)?.compatible;
    let comm = op_norm(&p.matrix().commutator(a.matrix()))?;
    Ok((lhs, comm <= tol.compat))
}

/// Labels of the five blocks, in priority order for overlapping regions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Block {
    /// `a = 1` here.
    P1,
    /// `b = 1` here.
    P2,
    /// Both restrictions strict.
    S,
    /// `a = 0` here.
    N1,
    /// `b = 0` here.
    N2,
}

impl Block {
    pub const ALL: [Block; 5] = [Block::P1, Block::P2, Block::S, Block::N1, Block::N2];

    pub fn name(self) -> &'static str {
        match self {
            Block::P1 => "p1",
            Block::P2 => "p2",
            Block::S => "s",
            Block::N1 => "n1",
            Block::N2 => "n2",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Splitting of a compatible pair along five mutually orthogonal projections
/// summing to the identity.
#[derive(Debug, Clone)]
pub struct FiveBlockDecomposition {
    projections: [Projection; 5],
    bases: [Vec<Vec<Complex64>>; 5],
    blocks_a: [Option<CMatrix>; 5],
    blocks_b: [Option<CMatrix>; 5],
    /// Frobenius mass of `W* a W` and `W* b W` outside the diagonal blocks,
    /// where `W` stacks the block bases. The larger of the two.
    pub off_block_mass: f64,
}

impl FiveBlockDecomposition {
    pub fn projection(&self, b: Block) -> &Projection {
        &self.projections[b.index()]
    }

    /// Orthonormal basis of the block's range; the restricted blocks are
    /// written in this basis.
    pub fn basis(&self, b: Block) -> &[Vec<Complex64>] {
        &self.bases[b.index()]
    }

    /// `a` restricted to the block, or `None` if the block is empty.
    pub fn block_a(&self, b: Block) -> Option<&CMatrix> {
        self.blocks_a[b.index()].as_ref()
    }

    pub fn block_b(&self, b: Block) -> Option<&CMatrix> {
        self.blocks_b[b.index()].as_ref()
    }

    pub fn rank(&self, b: Block) -> usize {
        self.bases[b.index()].len()
    }

    /// Reassembles `(a, b)` from the restricted blocks.
    pub fn reconstruct(&self) -> (CMatrix, CMatrix) {
        let n = self.projections[0].n();
        let mut a = CMatrix::zeros(n);
        let mut b = CMatrix::zeros(n);
        for blk in Block::ALL {
            let basis = &self.bases[blk.index()];
            if let (Some(ba), Some(bb)) = (self.block_a(blk), self.block_b(blk)) {
                a = &a + &lift(ba, basis, n);
                b = &b + &lift(bb, basis, n);
            }
        }
        (a, b)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let mut projections = serde_json::Map::new();
        let mut blocks_a = serde_json::Map::new();
        let mut blocks_b = serde_json::Map::new();
        for blk in Block::ALL {
            let i = blk.index();
            projections.insert(blk.name().into(), serde_json::to_value(self.projections[i].matrix()).unwrap());
            blocks_a.insert(blk.name().into(), serde_json::to_value(&self.blocks_a[i]).unwrap());
            blocks_b.insert(blk.name().into(), serde_json::to_value(&self.blocks_b[i]).unwrap());
        }
        serde_json::json!({
            "projections": projections,
            "blocks": { "a": blocks_a, "b": blocks_b },
            "off_block_mass": self.off_block_mass,
        })
    }
}

/// `V X V*` for a `k×k` block `X` and `k` orthonormal columns `V`.
fn lift(x: &CMatrix, basis: &[Vec<Complex64>], n: usize) -> CMatrix {
    let k = basis.len();
    let mut out = CMatrix::zeros(n);
    for r in 0..k {
        for c in 0..k {
            let w = x[(r, c)];
            if w.norm() == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = basis[r][i] * w;
                for j in 0..n {
                    out[(i, j)] += vi * basis[c][j].conj();
                }
            }
        }
    }
    out
}

/// `p ∧ q`: spectral projection of `pqp` onto eigenvalues ≥ `1 − tol.spec`.
pub fn meet(p: &Projection, q: &Projection, tol: &Tolerances) -> Result<Projection> {
    let pqp = Hermitian::from_parts(&(&(p.matrix() * q.matrix()) * p.matrix()));
    let sd = pqp.eig()?;
    Ok(sd.spectral_projection(tol.cluster, |c| c[c.len() - 1] >= 1.0 - tol.spec))
}

fn post(msg: String) -> Error {
    Error::PostconditionFailure(msg)
}

/// Five-block decomposition of an absolutely compatible pair.
///
/// Blocks are peeled off in the order `p1, p2, n1, n2`, each intersected with
/// the complement of everything taken before, and `s` is what remains:
///
/// - `p1 = s(a)`
/// - `p2 = s(b) ∧ p1⊥`
/// - `n1 = n(a) ∧ (p1 + p2)⊥`
/// - `n2 = n(b) ∧ (p1 + p2 + n1)⊥`
/// - `s  = I − p1 − p2 − n1 − n2`
///
/// so a region where `a = 1` and `b = 0` lands in `p1`. Every structural
/// claim about the result is re-verified; a violation is reported as
/// [`Error::PostconditionFailure`].
pub fn five_block_decompose(a: &Effect, b: &Effect, tol: &Tolerances) -> Result<FiveBlockDecomposition> {
    a.matrix().ensure_same_dim(b.matrix())?;
    let report = is_abs_compatible(a, b, tol)?;
    if !report.compatible {
        return Err(Error::NotAbsolutelyCompatible(report.residual));
    }
    let n = a.n();
    let id = CMatrix::identity(n);

    let p1 = support_s(a, tol)?;
    let taken = p1.matrix().clone();
    let p2 = meet(&support_s(b, tol)?, &complement_of(&taken)?, tol)?;
    let taken = &taken + p2.matrix();
    let n1 = meet(&null_n(a, tol)?, &complement_of(&taken)?, tol)?;
    let taken = &taken + n1.matrix();
    let n2 = meet(&null_n(b, tol)?, &complement_of(&taken)?, tol)?;
    let taken = &taken + n2.matrix();
    let s_mat = Hermitian::from_parts(&(&id - &taken));
    let s = {
        let sd = s_mat.eig()?;
        if sd.min() < -tol.proj || sd.max() > 1.0 + tol.proj {
            return Err(post(format!(
                "remainder I − p1 − p2 − n1 − n2 is not a projection (spectrum [{:.3e}, {:.3e}])",
                sd.min(),
                sd.max()
            )));
        }
        sd.spectral_projection(tol.cluster, |c| c[c.len() - 1] > 0.5)
    };

    let projections = [p1, p2, s, n1, n2];

    for i in 0..5 {
        for j in (i + 1)..5 {
            let overlap = op_norm(&(projections[i].matrix() * projections[j].matrix()))?;
            if overlap > tol.proj {
                return Err(post(format!(
                    "blocks {} and {} overlap ({overlap:.3e})",
                    Block::ALL[i].name(),
                    Block::ALL[j].name()
                )));
            }
        }
    }
    let sum = projections.iter().fold(CMatrix::zeros(n), |acc, p| &acc + p.matrix());
    let sum_defect = op_norm(&(&sum - &id))?;
    if sum_defect > tol.proj {
        return Err(post(format!("blocks do not sum to I ({sum_defect:.3e})")));
    }

    let bases: [Vec<Vec<Complex64>>; 5] = [
        projections[0].basis()?,
        projections[1].basis()?,
        projections[2].basis()?,
        projections[3].basis()?,
        projections[4].basis()?,
    ];
    let all: Vec<Vec<Complex64>> = bases.iter().flatten().cloned().collect();
    if all.len() != n {
        return Err(post(format!("block ranks sum to {} instead of {n}", all.len())));
    }

    let wa = a.matrix().compress(&all, &all);
    let wb = b.matrix().compress(&all, &all);
    let mut owner = Vec::with_capacity(n);
    for (k, basis) in bases.iter().enumerate() {
        owner.extend(std::iter::repeat_n(k, basis.len()));
    }
    let off = |w: &Vec<Vec<Complex64>>| {
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                if owner[r] != owner[c] {
                    s += w[r][c].norm_sqr();
                }
            }
        }
        s.sqrt()
    };
    let off_block_mass = off(&wa).max(off(&wb));
    if off_block_mass > tol.block {
        return Err(post(format!("off-block mass {off_block_mass:.3e} exceeds {:.1e}", tol.block)));
    }

    let mut blocks_a: [Option<CMatrix>; 5] = Default::default();
    let mut blocks_b: [Option<CMatrix>; 5] = Default::default();
    let mut start = 0;
    for (k, basis) in bases.iter().enumerate() {
        let len = basis.len();
        if len > 0 {
            let cut = |w: &Vec<Vec<Complex64>>| CMatrix::from_fn(len, |r, c| w[start + r][start + c]).hermitian_part();
            blocks_a[k] = Some(cut(&wa));
            blocks_b[k] = Some(cut(&wb));
        }
        start += len;
    }

    let dec = FiveBlockDecomposition { projections, bases, blocks_a, blocks_b, off_block_mass };
    check_block_contents(&dec, tol)?;
    Ok(dec)
}

/// `I − taken`, re-extracted from its eigenvectors. `taken` is a sum of
/// mutually orthogonal projections, so the complement is one too.
fn complement_of(taken: &CMatrix) -> Result<Projection> {
    let comp = Hermitian::from_parts(&(&CMatrix::identity(taken.n()) - taken));
    Ok(comp.eig()?.spectral_projection(0.0, |c| c[c.len() - 1] > 0.5))
}

fn check_block_contents(dec: &FiveBlockDecomposition, tol: &Tolerances) -> Result<()> {
    let dist = |x: &CMatrix, scalar: f64| -> Result<f64> { op_norm(&(x - &CMatrix::scalar(x.n(), scalar))) };
    if let Some(x) = dec.block_a(Block::P1) {
        let d = dist(x, 1.0)?;
        if d > tol.block {
            return Err(post(format!("a is not the identity on p1 ({d:.3e})")));
        }
    }
    if let Some(x) = dec.block_b(Block::P2) {
        let d = dist(x, 1.0)?;
        if d > tol.block {
            return Err(post(format!("b is not the identity on p2 ({d:.3e})")));
        }
    }
    if let Some(x) = dec.block_a(Block::N1) {
        let d = dist(x, 0.0)?;
        if d > tol.block {
            return Err(post(format!("a does not vanish on n1 ({d:.3e})")));
        }
    }
    if let Some(x) = dec.block_b(Block::N2) {
        let d = dist(x, 0.0)?;
        if d > tol.block {
            return Err(post(format!("b does not vanish on n2 ({d:.3e})")));
        }
    }
    if let (Some(sa), Some(sb)) = (dec.block_a(Block::S), dec.block_b(Block::S)) {
        let ra = is_strict(sa, tol)?;
        let rb = is_strict(sb, tol)?;
        if !ra.strict || !rb.strict {
            return Err(post(format!(
                "s-block restrictions are not strict (a: [{:.3e}, {:.3e}], b: [{:.3e}, {:.3e}])",
                ra.min_modulus, ra.max_modulus, rb.min_modulus, rb.max_modulus
            )));
        }
        let r = compat_residual(sa, sb, tol)?;
        if r > tol.compat {
            return Err(post(format!("s-block restrictions are not compatible ({r:.3e})")));
        }
    }
    Ok(())
}
