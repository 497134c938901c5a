use std::path::{Path, PathBuf};

use abscompat::canonical::{canonicalize, strict_unitary_from_params};
use abscompat::compat::{five_block_decompose, is_abs_compatible};
use abscompat::fuzzgen::{
    haar_unitary, random_abscompat_pair, random_commuting_strict_pair, random_projection_effect,
    random_strict_projection, random_strict_unitary_params,
};
use abscompat::geometry::{decompose_pair_m2, geometry_report, BlochPoint, PairSpecM2};
use abscompat::hermitian::Effect;
use abscompat::{CMatrix, Tolerances};
use clap::{Args, ValueEnum};
use serde_json::{json, Value};

use crate::output::{code, csv_text, emit, num, read_matrix, to_json, write_file, CliResult, Failure};
use crate::{Format, GlobalOpts};

fn read_effect(path: &Path, tol: &Tolerances) -> CliResult<Effect> {
    let m = read_matrix(path)?;
    Effect::new(m, tol).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn read_pair(a: &Path, b: &Path, tol: &Tolerances) -> CliResult<(Effect, Effect)> {
    let a = read_effect(a, tol)?;
    let b = read_effect(b, tol)?;
    a.matrix().ensure_same_dim(b.matrix()).map_err(Failure::params)?;
    Ok((a, b))
}

pub fn check(g: &GlobalOpts, tol: &Tolerances, a: &Path, b: &Path) -> CliResult<u8> {
    let (a, b) = read_pair(a, b, tol)?;
    let report = is_abs_compatible(&a, &b, tol)?;
    let text = match g.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            csv_text(&["compatible", "residual"], &[vec![report.compatible.to_string(), num(report.residual)]])?
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(if report.compatible { code::OK } else { code::NOT_COMPATIBLE })
}

pub fn decompose(g: &GlobalOpts, tol: &Tolerances, a: &Path, b: &Path, blocks: Option<&Path>) -> CliResult<u8> {
    let (a, b) = read_pair(a, b, tol)?;
    if let Some(path) = blocks {
        let dec = five_block_decompose(&a, &b, tol)?;
        write_file(path, &(to_json(&dec.to_json_value())? + "\n"))?;
    }
    let cf = canonicalize(&a, &b, tol)?;
    let text = match g.format {
        Format::Json => to_json(&cf)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = (0..cf.m())
                .map(|k| {
                    vec![
                        k.to_string(),
                        num(cf.x0[k]),
                        num(cf.p.a0[k]),
                        num(cf.p.w[k].re),
                        num(cf.p.w[k].im),
                        num(cf.residual),
                    ]
                })
                .collect();
            csv_text(&["site", "x0", "a0", "w_re", "w_im", "residual"], &rows)?
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(code::OK)
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
pub enum GenKind {
    Pair,
    Unitary,
    Projection,
    Commuting,
}

#[derive(Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    kind: GenKind,
    /// Matrix dimension.
    #[arg(long)]
    n: Option<usize>,
    /// Number of 2×2 sites for `--strict` unitaries and projections.
    #[arg(long)]
    sites: Option<usize>,
    /// Spectral margin kept away from 0 and 1.
    #[arg(long, default_value_t = 0.05)]
    delta: f64,
    /// Strict unitary or projection over a diagonal algebra.
    #[arg(long)]
    strict: bool,
}

pub fn gen(g: &GlobalOpts, _tol: &Tolerances, args: &GenArgs) -> CliResult<u8> {
    let seed = g.seed;
    let n = args.n.unwrap_or(2);
    let sites = args.sites.unwrap_or_else(|| (n / 2).max(1));
    let mut meta = json!({ "kind": args.kind.to_possible_value().map(|v| v.get_name().to_owned()), "seed": seed });
    let matrices: Vec<(&str, CMatrix)> = match args.kind {
        GenKind::Pair => {
            let inst = random_abscompat_pair(n, seed, args.delta).map_err(Failure::params)?;
            meta["x0"] = json!(inst.x0);
            meta["a0"] = json!(inst.p.a0);
            meta["w"] = json!(inst.p.w.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>());
            vec![("a", inst.a.matrix().clone()), ("b", inst.b.matrix().clone())]
        }
        GenKind::Commuting => {
            let (a, b) = random_commuting_strict_pair(n, seed, args.delta).map_err(Failure::params)?;
            vec![("a", a.matrix().clone()), ("b", b.matrix().clone())]
        }
        GenKind::Unitary if args.strict => {
            let q = random_strict_unitary_params(sites, seed, args.delta).map_err(Failure::params)?;
            let u = strict_unitary_from_params(&q, &Tolerances::default()).map_err(Failure::params)?;
            meta["sites"] = json!(sites);
            vec![("unitary", u.embed())]
        }
        GenKind::Unitary => vec![("unitary", haar_unitary(n, seed).map_err(Failure::params)?.into_matrix())],
        GenKind::Projection if args.strict => {
            let p = random_strict_projection(sites, seed, args.delta).map_err(Failure::params)?;
            meta["sites"] = json!(sites);
            vec![("projection", p.embed())]
        }
        GenKind::Projection => {
            let (p, _) = random_projection_effect(n, seed, false).map_err(Failure::params)?;
            vec![("projection", p.matrix().clone())]
        }
    };
    eprintln!("seed {seed}");

    match &g.out {
        Some(dir) => {
            let mut files = Vec::new();
            for (name, m) in &matrices {
                let path: PathBuf = dir.join(format!("{name}.json"));
                write_file(&path, &(to_json(m)? + "\n"))?;
                files.push(path.display().to_string());
            }
            meta["files"] = json!(files);
            emit(None, &to_json(&meta)?)?;
        }
        None => {
            for (name, m) in &matrices {
                meta[*name] = serde_json::to_value(m).map_err(|e| Failure::usage(e.to_string()))?;
            }
            emit(None, &to_json(&meta)?)?;
        }
    }
    Ok(code::OK)
}

fn parse_point(s: &str) -> Result<BlochPoint, String> {
    let parts: Vec<f64> =
        s.split(',').map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}"))).collect::<Result<_, _>>()?;
    match parts[..] {
        [x, y, z] => Ok(BlochPoint::new(x, y, z)),
        _ => Err(format!("expected x,y,z, got {} values", parts.len())),
    }
}

#[derive(Args)]
pub struct GeometryArgs {
    /// 2×2 effect files `A` and `B`; alternatively give `--pivot`, `--q`, `--lambda`.
    a: Option<PathBuf>,
    b: Option<PathBuf>,
    /// Bloch point of `P` on the boundary sphere.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pivot: Option<BlochPoint>,
    /// Bloch point of `Q` on the boundary sphere.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    q: Option<BlochPoint>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Number of points sampled on the pivotal sphere.
    #[arg(long, default_value_t = 0)]
    sample: usize,
}

pub fn geometry(g: &GlobalOpts, tol: &Tolerances, args: &GeometryArgs) -> CliResult<u8> {
    let spec = match (&args.a, &args.b, args.pivot, args.q, args.lambda) {
        (Some(a), Some(b), None, None, None) => {
            let (a, b) = read_pair(a, b, tol)?;
            decompose_pair_m2(&a, &b, tol)?
        }
        (None, None, Some(p), Some(q), Some(lambda)) => {
            PairSpecM2::from_points(p, q, lambda, tol).map_err(Failure::params)?
        }
        _ => return Err(Failure::usage("give either two matrix files or all of --pivot, --q and --lambda")),
    };
    let report = geometry_report(&spec, tol).map_err(Failure::params)?;
    let samples = report.pivotal.sample(args.sample);

    let text = match g.format {
        Format::Json => {
            let mut v: Value = serde_json::to_value(report).map_err(|e| Failure::usage(e.to_string()))?;
            if !samples.is_empty() {
                v["samples"] = json!(samples);
            }
            to_json(&v)?
        }
        Format::Csv => {
            let point = |kind: &str, name: &str, p: BlochPoint, value: String| {
                vec![kind.to_owned(), name.to_owned(), num(p.x), num(p.y), num(p.z), value]
            };
            let pts = &report.points;
            let mut rows = vec![
                point("ball", "center", report.ball.center, num(report.ball.radius)),
                point("pivotal", "center", report.pivotal.center, num(report.pivotal.radius)),
                point("pivotal", "pivot", report.pivotal.pivot, num(report.pivotal.index)),
            ];
            for (name, p) in [("P", pts.p), ("Pp", pts.pp), ("Q", pts.q), ("Qp", pts.qp), ("A", pts.a), ("B", pts.b)] {
                rows.push(point("point", name, p, String::new()));
            }
            for (name, v) in report.residuals.named() {
                rows.push(vec!["residual".into(), name.into(), String::new(), String::new(), String::new(), num(v)]);
            }
            for (i, p) in samples.iter().enumerate() {
                rows.push(point("sample", &i.to_string(), *p, String::new()));
            }
            csv_text(&["kind", "name", "x", "y", "z", "value"], &rows)?
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(code::OK)
}
