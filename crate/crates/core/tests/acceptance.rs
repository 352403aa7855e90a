//! Acceptance run: one pass/fail line per criterion.
//!
//! `cargo test -p hskpz --test acceptance` runs everything; numeric arguments after `--`
//! select criteria, e.g. `-- 1 11 12`.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use common::{admissible, brute_log_partition, brute_passage, paths, rel_close, weight_of, Lcg};
use hskpz::lpp::{self, BoundaryFunction, Constraint, PassageQuery, TieBreak, NEG};
use hskpz::polymer;
use hskpz::verify::{self, MCConfig, SuiteReport, SUITES};
use hskpz::{env, EnvironmentSpec, SeededSource, WeightField, Weights, Window};

const SEED: u64 = 20_240_601;

struct Outcome {
    pass: bool,
    detail: String,
}

fn from_suite(r: &SuiteReport) -> Outcome {
    let passed = r.checks.iter().filter(|c| c.pass).count();
    let mut detail = format!("{passed}/{} checks pass", r.checks.len());
    for c in &r.checks {
        let shown = c.statistic.or(c.value).map(|v| format!("{v:.4}")).unwrap_or_else(|| "-".into());
        let bound = match c.lower {
            Some(lo) => format!("[{lo}, {}]", c.threshold),
            None => format!("{}", c.threshold),
        };
        detail.push_str(&format!("\n      {} {}: {} vs {}", if c.pass { "ok  " } else { "FAIL" }, c.label, shown, bound));
    }
    Outcome { pass: r.pass, detail }
}

fn suite(name: &str) -> Outcome {
    match verify::run_suite(name, &MCConfig::new(0, SEED)) {
        Ok(r) => from_suite(&r),
        Err(e) => Outcome { pass: false, detail: format!("error: {e}") },
    }
}

fn rsk() -> Outcome {
    let r = match verify::run_suite("rsk-isometry", &MCConfig::new(0, SEED)) {
        Ok(r) => r,
        Err(e) => return Outcome { pass: false, detail: format!("error: {e}") },
    };
    let worst = r.checks.iter().filter_map(|c| c.value).fold(0.0, f64::max);
    let mut o = from_suite(&r);
    o.pass &= worst < 1e-9;
    o
}

fn random_field(spec: EnvironmentSpec, n: i64, seed: u64) -> WeightField {
    env::materialize(&spec.with_window(Window::rect(n, n)), &SeededSource::new(SEED, seed)).expect("field")
}

fn random_constraint(rng: &mut Lcg, n: i64, kind: usize) -> Constraint {
    match kind {
        0 => Constraint::None,
        1 => Constraint::HalfSpace,
        2 => Constraint::DiagonalCondition,
        3 => Constraint::HitShiftedDiagonal(rng.range(-2, 2)),
        _ => Constraint::Parallelogram { n, ell: (2.0 + 3.0 * rng.uniform()) / (n as f64).powf(2.0 / 3.0) },
    }
}

/// Every passage and partition operation against exhaustive enumeration on small windows.
fn oracle() -> Outcome {
    let mut rng = Lcg(SEED);
    let mut mismatches = Vec::new();
    let (mut checked, mut bad) = (0usize, 0usize);
    let mut note = |ok: bool, what: String| {
        checked += 1;
        if !ok {
            bad += 1;
            if mismatches.len() < 5 {
                mismatches.push(what);
            }
        }
    };
    for kind in 0..5 {
        for inst in 0..500u64 {
            let n = rng.range(2, 8);
            let c = random_constraint(&mut rng, n, kind);
            let tag = 1000 * kind as u64 + inst;
            let exp = random_field(EnvironmentSpec::half_space_exponential(0.3 + rng.uniform()), n, tag);
            let lg = random_field(EnvironmentSpec::half_space_log_gamma(0.5 + rng.uniform(), 1.0 + rng.uniform()), n, (tag + 1) << 20);
            let (a, b) = if matches!(c, Constraint::Parallelogram { .. }) {
                ((1, 1), (n, n))
            } else {
                let a = (rng.range(1, n), rng.range(1, n));
                (a, (rng.range(a.0, n), rng.range(a.1, n)))
            };
            let mut q = PassageQuery::new(a, b).with(c);
            if rng.uniform() < 0.3 {
                q = q.exclude_start();
            }
            let zt = lpp::passage_time(&exp, &q).expect("passage").value;
            note(zt == brute_passage(&exp, &q), format!("passage {q:?}"));
            let pt = polymer::log_partition(&lg, &q).expect("partition").log_z;
            let bp = brute_log_partition(&lg, &q);
            note(pt == bp || rel_close(pt, bp, 1e-10), format!("partition {q:?}"));
            if zt > NEG && q.include_start_weight {
                let g = lpp::passage_with_geodesic(&exp, &q, TieBreak::Left).expect("geodesic").geodesic.unwrap();
                let ok = paths(a, b).contains(&g) && admissible(&g, c) && weight_of(&exp, &g) == zt;
                note(ok, format!("geodesic {q:?}"));
            }
            if matches!(c, Constraint::Parallelogram { .. }) {
                let Constraint::Parallelogram { ell, .. } = c else { unreachable!() };
                let v = lpp::constrained_parallelogram(&exp, n, ell).expect("parallelogram").value;
                note(v == brute_passage(&exp, &PassageQuery::new((1, 1), (n, n)).with(c)), format!("parallelogram n={n}"));
            }
        }
    }
    // line and seeded targets
    for inst in 0..500u64 {
        let f = random_field(EnvironmentSpec::half_space_exponential(0.8), 8, 50_000 + inst);
        let z = random_field(EnvironmentSpec::half_space_log_gamma(1.0, 1.5), 8, 60_000 + inst);
        let m = rng.range(1, 4);
        let n = rng.range(m, 9 - m);
        let hs = Constraint::HalfSpace;
        let line = |i: i64| PassageQuery::new((1, 1), (n + i, m - i)).with(hs);
        let v = lpp::point_to_line_trapezoid(&f, n, m).expect("trapezoid").value;
        note(v == (0..m).map(|i| brute_passage(&f, &line(i))).fold(NEG, f64::max), format!("trapezoid n={n} m={m}"));
        let lz = polymer::trapezoid_log_partition(&z, n, m).expect("trapezoid partition").log_z;
        let bz: f64 = (0..m).map(|i| brute_log_partition(&z, &line(i)).exp()).sum();
        note(rel_close(lz, bz.ln(), 1e-10), format!("trapezoid partition n={n} m={m}"));

        let bf = BoundaryFunction::new(-8, (0..17).map(|_| 4.0 * rng.uniform() - 2.0).collect());
        let (j, h) = (rng.range(-3, 3), rng.range(1, 4));
        let got = lpp::boundary_seeded_passage(&f, &bf, (j, h)).expect("seeded").value;
        let e = |x: i64| bf.eval(x).unwrap();
        let w = |i: i64, k: i64| match (i, k) {
            (0, 0) => 0.0,
            (i, 0) => e(i) - e(i - 1),
            (0, k) => e(-k) - e(-k + 1),
            (i, k) => f.weight(i, k),
        };
        let brute = paths((0, 0), lpp::l_point(j, h))
            .iter()
            .filter(|p| admissible(p, Constraint::DiagonalCondition))
            .map(|p| p.iter().map(|&(a, b)| w(a, b)).sum::<f64>())
            .fold(NEG, f64::max);
        note(rel_close(got, brute, 1e-12), format!("seeded j={j} h={h}"));
    }
    let mut detail = format!("{checked} comparisons, {bad} mismatches");
    for m in mismatches {
        detail.push_str(&format!("\n      FAIL {m}"));
    }
    Outcome { pass: bad == 0, detail }
}

/// Every suite under one and three workers at reduced size, compared without timings.
fn reproducibility() -> Outcome {
    let mut bad = Vec::new();
    for s in SUITES {
        let run = |w| verify::run_suite(s, &MCConfig::new(30, SEED).with_workers(w)).map(|r| r.canonical_json());
        match (run(1), run(3)) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(_), Ok(_)) => bad.push(format!("{s}: reports differ")),
            (Err(e), _) | (_, Err(e)) => bad.push(format!("{s}: {e}")),
        }
    }
    let mut detail = format!("{} suites, {} differ", SUITES.len(), bad.len());
    for b in &bad {
        detail.push_str(&format!("\n      FAIL {b}"));
    }
    Outcome { pass: bad.is_empty(), detail }
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("two-line RSK isometry", rsk),
        ("clock TASEP equals the Poisson-avoiding metric", || suite("tasep-metric-equivalence")),
        ("half-space exchange identity in law", || suite("trapezoid-identity")),
        ("parameter permutation invariance", || suite("permutation-invariance")),
        ("joint stationarity", || suite("stationary")),
        ("Burke property", || suite("burke")),
        ("limit shape", || suite("limit-shape")),
        ("fluctuation exponent crossover", || suite("exponent")),
        ("quadrangle and metric composition", || suite("deterministic-inequalities")),
        ("horizon slopes and Brownian marginal", || suite("horizon")),
        ("brute-force oracle equivalence", oracle),
        ("reproducibility across worker counts", reproducibility),
    ];
    let selected: Vec<usize> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut all = true;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let id = k + 1;
        if !selected.is_empty() && !selected.contains(&id) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        all &= o.pass;
        println!(
            "criterion {id:>2} {} {name} ({:.1} s): {}",
            if o.pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            o.detail
        );
    }
    println!("acceptance: {}", if all { "PASS" } else { "FAIL" });
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
