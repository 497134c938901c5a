use abscompat::canonical::canonicalize;
use abscompat::compat::is_abs_compatible;
use abscompat::fuzzgen::random_abscompat_pair;
use abscompat::geometry::{decompose_pair_m2, geometry_report};
use abscompat::Tolerances;

fn main() -> abscompat::Result<()> {
    let tol = Tolerances::default();

    // strict compatible pair on C⁴ (two sites)
    let inst = random_abscompat_pair(4, 7, 0.05)?;
    let report = is_abs_compatible(&inst.a, &inst.b, &tol)?;
    println!("compatible: {} (residual {:.2e})", report.compatible, report.residual);

    let cf = canonicalize(&inst.a, &inst.b, &tol)?;
    println!("x0 = {:?}, a0 = {:?}, residual {:.2e}", cf.x0, cf.p.a0, cf.residual);

    // 2×2 case: recover (P, Q, λ) and the Bloch-ball picture
    let pair = random_abscompat_pair(2, 7, 0.05)?;
    let spec = decompose_pair_m2(&pair.a, &pair.b, &tol)?;
    let geo = geometry_report(&spec, &tol)?;
    println!("λ = {:.6}, pivotal sphere radius {:.6}", spec.lambda, geo.pivotal.radius);
    println!("worst geometric residual {:.2e}", geo.residuals.max());
    Ok(())
}
