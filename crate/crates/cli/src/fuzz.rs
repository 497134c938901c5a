//! Seeded property campaigns. Trials run in parallel; trial `i` uses seed
//! `trial_seed(base, i)` and results are merged by trial index, so a report
//! depends only on (suite, base seed, trial count, tolerances).

use std::collections::BTreeMap;
use std::path::PathBuf;

use abscompat::canonical::canonicalize;
use abscompat::compat::{
    compat_residual, is_abs_compatible, is_orthogonal, projection_compat_equiv, sum_below_identity,
};
use abscompat::fuzzgen::{
    random_abscompat_pair, random_orthogonal_pair, random_pair_spec, random_projection_effect, trial_seed,
};
use abscompat::geometry::{decompose_pair_m2, geometry_report, pair_from_projections};
use abscompat::hermitian::Effect;
use abscompat::{Result, Tolerances};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{code, csv_text, emit, num, to_json, write_file, CliResult, Failure};
use crate::{Format, GlobalOpts};

const DELTA: f64 = 0.05;

pub const SUITES: [&str; 5] = ["compat", "canonical", "m2", "geometry", "equivalences"];

struct Check {
    name: &'static str,
    value: f64,
    limit: f64,
}

impl Check {
    fn new(name: &'static str, value: f64, limit: f64) -> Self {
        Self { name, value, limit }
    }

    fn passes(&self) -> bool {
        self.value <= self.limit
    }
}

/// Checks of one trial plus the instance to replay it.
struct Trial {
    checks: Vec<Check>,
    instance: Value,
}

fn pair_json(a: &Effect, b: &Effect) -> Value {
    json!({ "a": a.matrix(), "b": b.matrix() })
}

fn violation(ok: bool) -> f64 {
    if ok {
        0.0
    } else {
        1.0
    }
}

fn compat_trial(i: u64, seed: u64, tol: &Tolerances) -> Result<Trial> {
    let n = [2, 4, 8, 16][(i % 4) as usize];
    let inst = random_abscompat_pair(n, seed, DELTA)?;
    let r = compat_residual(inst.a.matrix(), inst.b.matrix(), tol)?;
    let r_swapped = compat_residual(inst.b.matrix(), inst.a.matrix(), tol)?;
    Ok(Trial {
        checks: vec![Check::new("residual", r, tol.compat), Check::new("symmetry", (r - r_swapped).abs(), 0.0)],
        instance: pair_json(&inst.a, &inst.b),
    })
}

fn canonical_trial(i: u64, seed: u64, tol: &Tolerances) -> Result<Trial> {
    let n = [2, 4, 8][(i % 3) as usize];
    let inst = random_abscompat_pair(n, seed, DELTA)?;
    let cf = canonicalize(&inst.a, &inst.b, tol)?;
    let mut want = inst.x0.clone();
    want.sort_by(f64::total_cmp);
    let x0_err = want.iter().zip(&cf.x0).map(|(w, g)| (w - g).abs()).fold(0.0, f64::max);
    Ok(Trial {
        checks: vec![
            Check::new("reconstruction", cf.residual_against(inst.a.matrix(), inst.b.matrix())?, tol.canon),
            Check::new("x0", x0_err, 1e-9),
        ],
        instance: pair_json(&inst.a, &inst.b),
    })
}

fn m2_trial(_: u64, seed: u64, tol: &Tolerances) -> Result<Trial> {
    let spec = random_pair_spec(seed, DELTA)?;
    let (a, b) = pair_from_projections(&spec, tol)?;
    let back = decompose_pair_m2(&a, &b, tol)?;
    Ok(Trial { checks: vec![Check::new("round_trip", back.distance(&spec), tol.geo)], instance: pair_json(&a, &b) })
}

fn geometry_trial(_: u64, seed: u64, tol: &Tolerances) -> Result<Trial> {
    let spec = random_pair_spec(seed, DELTA)?;
    let report = geometry_report(&spec, tol)?;
    let checks = report.residuals.named().into_iter().map(|(name, v)| Check::new(name, v, tol.geo)).collect();
    Ok(Trial { checks, instance: json!({ "P": spec.p.matrix(), "Q": spec.q.matrix(), "lambda": spec.lambda }) })
}

fn equivalences_trial(i: u64, seed: u64, tol: &Tolerances) -> Result<Trial> {
    let n = 1 + (i % 6) as usize;
    let (oa, ob) = random_orthogonal_pair(n, seed)?;
    let lhs = is_orthogonal(&oa, &ob, tol)?;
    let rhs = sum_below_identity(&oa, &ob, tol)? && is_abs_compatible(&oa, &ob, tol)?.compatible;
    let orth_ok = lhs && rhs;

    let generic = random_abscompat_pair(2 * n, seed ^ 1, DELTA)?;
    let lhs = is_orthogonal(&generic.a, &generic.b, tol)?;
    let rhs =
        sum_below_identity(&generic.a, &generic.b, tol)? && is_abs_compatible(&generic.a, &generic.b, tol)?.compatible;
    let generic_ok = !lhs && !rhs;

    let (p, a) = random_projection_effect(n, seed ^ 2, i.is_multiple_of(2))?;
    let (plhs, prhs) = projection_compat_equiv(&p, &a, tol)?;

    Ok(Trial {
        checks: vec![
            Check::new("orthogonality", violation(orth_ok && generic_ok), 0.0),
            Check::new("projection", violation(plhs == prhs), 0.0),
        ],
        instance: json!({
            "orthogonal": pair_json(&oa, &ob),
            "generic": pair_json(&generic.a, &generic.b),
            "projection": { "p": p.matrix(), "a": a.matrix() },
        }),
    })
}

type TrialFn = fn(u64, u64, &Tolerances) -> Result<Trial>;

fn suite_fn(name: &str) -> Option<TrialFn> {
    Some(match name {
        "compat" => compat_trial,
        "canonical" => canonical_trial,
        "m2" => m2_trial,
        "geometry" => geometry_trial,
        "equivalences" => equivalences_trial,
        _ => return None,
    })
}

#[derive(Serialize)]
struct Worst {
    value: f64,
    limit: f64,
    trial: u64,
    seed: u64,
}

#[derive(Serialize)]
struct FailureEntry {
    trial: u64,
    seed: u64,
    property: String,
    detail: String,
}

#[derive(Serialize)]
struct Report {
    suite: String,
    seed: u64,
    trials: u64,
    passed: u64,
    failed: u64,
    worst: BTreeMap<&'static str, Worst>,
    failures: Vec<FailureEntry>,
}

pub fn run(g: &GlobalOpts, tol: &Tolerances, suite: &str) -> CliResult<u8> {
    let trial_fn = suite_fn(suite)
        .ok_or_else(|| Failure::usage(format!("UnknownSuite: {suite:?} (expected one of {})", SUITES.join(", "))))?;
    if g.trials == 0 {
        return Err(Failure::usage("--trials must be at least 1"));
    }

    let results: Vec<(u64, u64, Result<Trial>)> = (0..g.trials)
        .into_par_iter()
        .map(|i| {
            let seed = trial_seed(g.seed, i);
            (i, seed, trial_fn(i, seed, tol))
        })
        .collect();

    let mut worst: BTreeMap<&'static str, Worst> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut bundle = Vec::new();
    let mut failed = 0;
    for (i, seed, result) in &results {
        let (i, seed) = (*i, *seed);
        match result {
            Ok(trial) => {
                let mut bad = false;
                for c in &trial.checks {
                    let slot = worst.entry(c.name).or_insert(Worst { value: c.value, limit: c.limit, trial: i, seed });
                    if c.value > slot.value || (c.value.is_nan() && !slot.value.is_nan()) {
                        *slot = Worst { value: c.value, limit: c.limit, trial: i, seed };
                    }
                    if !c.passes() {
                        bad = true;
                        failures.push(FailureEntry {
                            trial: i,
                            seed,
                            property: c.name.into(),
                            detail: format!("{} > {}", num(c.value), num(c.limit)),
                        });
                    }
                }
                if bad {
                    failed += 1;
                    bundle.push(json!({ "trial": i, "seed": seed, "instance": trial.instance }));
                }
            }
            Err(e) => {
                failed += 1;
                failures.push(FailureEntry { trial: i, seed, property: "error".into(), detail: e.to_string() });
                bundle.push(json!({ "trial": i, "seed": seed, "error": e.to_string() }));
            }
        }
    }

    let report = Report {
        suite: suite.to_owned(),
        seed: g.seed,
        trials: g.trials,
        passed: g.trials - failed,
        failed,
        worst,
        failures,
    };

    if !bundle.is_empty() {
        let path = fail_path(g, suite);
        let body = json!({ "suite": suite, "base_seed": g.seed, "tolerances": tol, "failures": bundle });
        write_file(&path, &(to_json(&body)? + "\n"))?;
        eprintln!("failing instances written to {}", path.display());
    }

    let text = match g.format {
        Format::Json => to_json(&report)?,
        Format::Csv => {
            let rows: Vec<Vec<String>> = report
                .worst
                .iter()
                .map(|(name, w)| {
                    vec![(*name).to_owned(), num(w.value), num(w.limit), w.trial.to_string(), w.seed.to_string()]
                })
                .collect();
            csv_text(&["property", "worst", "limit", "trial", "seed"], &rows)?
        }
    };
    emit(g.out.as_deref(), &text)?;
    Ok(if failed == 0 { code::OK } else { code::STRUCTURAL })
}

/// `<out>.fail.json` next to the report, or `fuzz-<suite>-<seed>.fail.json`.
fn fail_path(g: &GlobalOpts, suite: &str) -> PathBuf {
    match &g.out {
        Some(out) => out.with_extension("fail.json"),
        None => PathBuf::from(format!("fuzz-{suite}-{}.fail.json", g.seed)),
    }
}
