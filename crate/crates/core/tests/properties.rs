use abscompat::canonical::{
    canonical_pair_sites, canonicalize, strict_projection_from_params, strict_unitary_from_params,
    strict_unitary_params,
};
use abscompat::compat::{compat_residual, is_abs_compatible, sum_below_identity};
use abscompat::fuzzgen::{
    haar_unitary_with, random_abscompat_pair, random_orthogonal_pair, random_pair_spec, random_sphere_point,
    random_strict_effect, random_strict_projection_params, random_strict_unitary_params, rng, uniform,
};
use abscompat::geometry::{
    bloch_map, decompose_pair_m2, on_boundary, pair_from_projections, projection_at, PairSpecM2,
};
use abscompat::hermitian::{
    abs_op, is_strict, null_n, op_norm, polar_unitary, range_projection, support_s, unitarity_defect, Effect, Hermitian,
};
use abscompat::m2diag::{Block2, M2OverDiag};
use abscompat::{CMatrix, Complex64, Tolerances};
use proptest::prelude::*;
use rand::Rng;

fn tol() -> Tolerances {
    Tolerances::default()
}

/// Effect whose spectrum mixes exact 0s, exact 1s and interior values.
fn effect_with_edges(n: usize, seed: u64) -> Effect {
    let mut r = rng(seed);
    let values: Vec<f64> = (0..n)
        .map(|_| match r.random_range(0..3) {
            0 => 0.0,
            1 => 1.0,
            _ => uniform(&mut r, 0.1, 0.9),
        })
        .collect();
    let u = haar_unitary_with(&mut r, n);
    Effect::new(u.conjugate(&CMatrix::diag_real(&values)).hermitian_part(), &tol()).unwrap()
}

fn random_matrix(n: usize, seed: u64, rank: usize) -> CMatrix {
    let mut r = rng(seed);
    let cols: Vec<Vec<Complex64>> = (0..rank)
        .map(|_| (0..n).map(|_| Complex64::new(uniform(&mut r, -1.0, 1.0), uniform(&mut r, -1.0, 1.0))).collect())
        .collect();
    // rank-limited: n × rank times rank × n
    let mut x = CMatrix::zeros(n);
    for c in &cols {
        let w: Vec<Complex64> = (0..n).map(|_| Complex64::new(uniform(&mut r, -1.0, 1.0), 0.0)).collect();
        for i in 0..n {
            for j in 0..n {
                x[(i, j)] += c[i] * w[j];
            }
        }
    }
    x
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eig_is_deterministic(n in 1usize..7, seed in any::<u64>()) {
        let a = effect_with_edges(n, seed);
        let first = a.hermitian().eig().unwrap();
        let second = a.hermitian().eig().unwrap();
        prop_assert_eq!(first.values, second.values);
        prop_assert_eq!(first.vectors, second.vectors);
    }

    #[test]
    fn support_null_range_relations(n in 1usize..7, seed in any::<u64>()) {
        let t = tol();
        let a = effect_with_edges(n, seed);
        let s = support_s(&a, &t).unwrap();
        let z = null_n(&a, &t).unwrap();
        let r = range_projection(a.hermitian(), &t).unwrap();
        prop_assert!((s.matrix() * z.matrix()).max_abs() <= t.proj);
        prop_assert!((&(r.matrix() + z.matrix()) - &CMatrix::identity(n)).max_abs() <= t.proj);
        prop_assert!((&(r.matrix() * a.matrix()) - a.matrix()).max_abs() <= 1e-12);
    }

    #[test]
    fn modulus_of_positive_is_identity_map(n in 1usize..7, seed in any::<u64>()) {
        let a = effect_with_edges(n, seed);
        let m = abs_op(a.matrix(), &tol()).unwrap();
        prop_assert!((m.matrix() - a.matrix()).max_abs() <= 1e-12);
    }

    #[test]
    fn polar_reconstructs(n in 1usize..7, rank_cut in 0usize..3, seed in any::<u64>()) {
        let t = tol();
        let rank = n.saturating_sub(rank_cut);
        let x = random_matrix(n, seed, rank);
        let (u, m) = polar_unitary(&x, &t).unwrap();
        prop_assert!(unitarity_defect(u.matrix()).unwrap() <= t.unit);
        let scale = op_norm(&x).unwrap().max(1.0);
        prop_assert!(op_norm(&(&(u.matrix() * m.matrix()) - &x)).unwrap() <= 1e-10 * scale);
    }

    #[test]
    fn strictness_passes_to_complement(n in 1usize..7, seed in any::<u64>()) {
        let t = tol();
        let a = random_strict_effect(n, seed, 0.01).unwrap();
        prop_assert!(is_strict(a.matrix(), &t).unwrap().strict);
        prop_assert!(is_strict(a.complement().matrix(), &t).unwrap().strict);
    }

    #[test]
    fn compat_is_exactly_symmetric(n in 1usize..6, seed in any::<u64>()) {
        let t = tol();
        let a = effect_with_edges(n, seed);
        let b = effect_with_edges(n, seed.wrapping_add(1));
        prop_assert_eq!(
            compat_residual(a.matrix(), b.matrix(), &t).unwrap().to_bits(),
            compat_residual(b.matrix(), a.matrix(), &t).unwrap().to_bits()
        );
        prop_assert_eq!(is_abs_compatible(&a, &b, &t).unwrap(), is_abs_compatible(&b, &a, &t).unwrap());
    }

    #[test]
    fn orthogonal_pairs_are_compatible(n in 1usize..7, seed in any::<u64>()) {
        let t = tol();
        let (a, b) = random_orthogonal_pair(n, seed).unwrap();
        prop_assert!(sum_below_identity(&a, &b, &t).unwrap());
        prop_assert!(is_abs_compatible(&a, &b, &t).unwrap().compatible);
        prop_assert!(op_norm(&(a.matrix() * b.matrix())).unwrap() <= t.compat);
    }

    #[test]
    fn canonical_moduli_are_site_constants(m in 1usize..5, seed in any::<u64>()) {
        let t = tol();
        let mut r = rng(seed);
        let x0: Vec<f64> = (0..m).map(|_| uniform(&mut r, 0.02, 0.98)).collect();
        let q = random_strict_projection_params(m, r.random(), 0.02).unwrap();
        let p = strict_projection_from_params(&q, &t).unwrap();
        let (a, b) = canonical_pair_sites(&x0, &p).unwrap();
        let (a, b) = (a.embed(), b.embed());
        let xs = M2OverDiag::new(x0.iter().map(|&x| Block2::diag(x, x)).collect()).unwrap().embed();
        let id = CMatrix::identity(2 * m);
        let ma = abs_op(&(&a - &b), &t).unwrap();
        let mz = abs_op(&(&(&id - &a) - &b), &t).unwrap();
        prop_assert!((ma.matrix() - &xs).max_abs() <= t.canon);
        prop_assert!((mz.matrix() - &(&id - &xs)).max_abs() <= t.canon);
        prop_assert!(is_strict(&a, &t).unwrap().strict && is_strict(&b, &t).unwrap().strict);
    }

    #[test]
    fn strict_unitary_extraction_rebuilds(m in 1usize..5, seed in any::<u64>()) {
        let t = tol();
        let q = random_strict_unitary_params(m, seed, 0.01).unwrap();
        let u = strict_unitary_from_params(&q, &t).unwrap();
        let back = strict_unitary_from_params(&strict_unitary_params(&u, &t).unwrap(), &t).unwrap();
        prop_assert!(back.max_diff(&u) <= t.unit);
    }

    #[test]
    fn canonical_sites_are_sorted(n in prop::sample::select(vec![2usize, 4, 6]), seed in any::<u64>()) {
        let t = tol();
        let inst = random_abscompat_pair(n, seed, 0.05).unwrap();
        let cf = canonicalize(&inst.a, &inst.b, &t).unwrap();
        prop_assert!(cf.x0.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(cf.residual <= t.canon);
        prop_assert!(unitarity_defect(cf.u0.matrix()).unwrap() <= 1e-10);
    }

    #[test]
    fn bloch_map_is_affine(seed in any::<u64>(), t in 0.0f64..1.0) {
        let tl = tol();
        let mut r = rng(seed);
        let x = abscompat::geometry::bloch_matrix(random_sphere_point(&mut r));
        let y = abscompat::geometry::bloch_matrix(random_sphere_point(&mut r).lerp(abscompat::geometry::BALL_CENTER, 0.3));
        let mix = &x.scale(t) + &y.scale(1.0 - t);
        let lhs = bloch_map(&mix, &tl).unwrap();
        let rhs = bloch_map(&x, &tl).unwrap().scale(t) + bloch_map(&y, &tl).unwrap().scale(1.0 - t);
        prop_assert!(lhs.dist(rhs) <= 1e-14);
    }

    #[test]
    fn boundary_points_are_rank_one_projections(seed in any::<u64>(), shrink in 0.0f64..0.99) {
        let t = tol();
        let mut r = rng(seed);
        let pt = random_sphere_point(&mut r);
        prop_assert!(on_boundary(pt, &t));
        prop_assert!(projection_at(pt, &t).is_ok());
        let inner = abscompat::geometry::BALL_CENTER.lerp(pt, shrink);
        prop_assert!(!on_boundary(inner, &t));
        let m = abscompat::geometry::bloch_matrix(inner);
        prop_assert!(op_norm(&(&(&m * &m) - &m)).unwrap() > t.proj);
    }

    #[test]
    fn decomposition_is_unique(seed in any::<u64>()) {
        let t = tol();
        let spec = random_pair_spec(seed, 0.05).unwrap();
        let (a, b) = pair_from_projections(&spec, &t).unwrap();
        let back = decompose_pair_m2(&a, &b, &t).unwrap();
        prop_assert!(back.distance(&spec) <= t.geo);
        // a spec shifted by 10·εgeo in λ decomposes back to the shifted spec,
        // not the original
        let shifted = PairSpecM2::new(back.p.clone(), back.q.clone(), back.lambda + 10.0 * t.geo, &t).unwrap();
        let (a2, b2) = pair_from_projections(&shifted, &t).unwrap();
        let again = decompose_pair_m2(&a2, &b2, &t).unwrap();
        prop_assert!(again.distance(&shifted) <= t.geo);
        prop_assert!(again.distance(&spec) > t.geo);
    }
}

#[test]
fn hermitian_rejects_asymmetric_input() {
    let x = CMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
    assert!(Hermitian::new(x, &tol()).is_err());
}
