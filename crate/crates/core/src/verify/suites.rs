//! Named verification suites. Each returns its resolved parameters and a list of checks;
//! [`run_suite`] wraps them into a [`SuiteReport`].

use std::time::Instant;

use serde_json::{json, Value};

use super::mc::MCConfig;
use super::report::{Check, SuiteReport};
use super::scan::{self, TailSide};
use super::stats::{self, KsReport};
use crate::env::{self, EnvironmentSpec, Kind, LazyField, SeededSource, Window};
use crate::error::{domain, Error, Result};
use crate::horizon::{self, HorizonGrid, StationaryMeasureSpec, StationaryModel};
use crate::lpp::{self, Constraint, PassageQuery, Point};
use crate::pam;
use crate::polymer::{self, TwoLineAlgebra};
use crate::rng::Stream;
use crate::tasep::{self, ClockField, HeightFunction};

pub const SUITES: &[&str] = &[
    "rsk-isometry",
    "tasep-metric-equivalence",
    "trapezoid-identity",
    "permutation-invariance",
    "stationary",
    "burke",
    "limit-shape",
    "exponent",
    "deterministic-inequalities",
    "horizon",
    "exp-brownian-swap",
    "tasep-lpp",
    "tail-bounds",
    "two-point",
];

type Outcome = Result<(Value, Vec<Check>)>;

fn replicas(mc: &MCConfig, default: usize) -> MCConfig {
    mc.with_replicas(if mc.replicas == 0 { default } else { mc.replicas })
}

fn ks(reports: Vec<KsReport>) -> Vec<Check> {
    reports.into_iter().map(Check::from).collect()
}

fn column(rows: &[Vec<f64>], k: usize) -> Vec<f64> {
    rows.iter().map(|r| r[k]).collect()
}

/// Random two-line instances with `n ≤ max_n` under both algebras; worst identity gap.
pub fn suite_rsk_isometry(instances: usize, max_n: usize, mc: &MCConfig) -> Outcome {
    let mc = mc.with_replicas(instances);
    let mut checks = Vec::new();
    for (label, algebra) in [("max-plus", TwoLineAlgebra::MaxPlus), ("sum-product", TwoLineAlgebra::SumProduct)] {
        let worst = mc.run(|s| {
            let mut st = s.stream(&[crate::rng::tag::TWO_LINE]);
            let n = 1 + (st.uniform() * max_n as f64) as usize % max_n;
            let a: Vec<f64> = (0..n).map(|_| st.exp(1.0)).collect();
            let b: Vec<f64> = (0..n).map(|_| st.exp(1.0)).collect();
            let e = polymer::rsk_two_line(&a, &b, algebra)?;
            Ok(polymer::verify_isometry(&e, 1e-9).max_violation)
        })?;
        let max = worst.iter().copied().fold(0.0, f64::max);
        checks.push(Check::below(format!("{label} isometry violation"), max, 1e-9).with_n(instances));
    }
    Ok((json!({"instances": instances, "max_n": max_n}), checks))
}

/// Clock dynamics against the metric formula for each `d`, from three initial profiles.
pub fn suite_tasep_metric(ds: &[usize], realizations: usize, t: f64, alpha: f64, x_max: usize, mc: &MCConfig) -> Outcome {
    let mc = mc.with_replicas(realizations);
    let sites = tasep::padded_sites(x_max, alpha, t);
    let xs: Vec<usize> = (0..=x_max).collect();
    let starts = [HeightFunction::narrow_wedge(0, 1), HeightFunction::narrow_wedge(5, 8), HeightFunction::flat(2)];
    let mut checks = Vec::new();
    for &d in ds {
        let bad = mc.side(d as u64).run(|s| {
            let clocks = ClockField::sample(d, alpha, sites, t, &s)?;
            let mut ok = true;
            for h0 in &starts {
                ok &= pam::tasep_coupling_check(&clocks, h0, t, &xs)?;
            }
            Ok(!ok)
        })?;
        let mismatches = bad.iter().filter(|b| **b).count();
        checks.push(Check::exact(format!("d={d} heights equal metric formula at sites 0..={x_max}"), mismatches, realizations));
    }
    Ok((json!({"d": ds, "realizations": realizations, "t": t, "alpha": alpha, "x_max": x_max, "sites": sites}), checks))
}

/// Half-space point-to-line against the boundary-column full-space passage time.
pub fn suite_trapezoid_identity(n: i64, m: i64, alphas: &[f64], mc: &MCConfig) -> Result<Vec<KsReport>> {
    if n < m || m < 1 {
        return domain(format!("need n ≥ m ≥ 1, got n={n}, m={m}"));
    }
    let mut out = Vec::new();
    for (k, &alpha) in alphas.iter().enumerate() {
        let half = mc.side(10 + 2 * k as u64).run(|s| {
            let f = LazyField::new(EnvironmentSpec::half_space_exponential(alpha), s)?;
            Ok(lpp::point_to_line_trapezoid(&f, n, m)?.value)
        })?;
        let full = mc.side(11 + 2 * k as u64).run(|s| {
            let f = LazyField::new(EnvironmentSpec::column_exponential(alpha), s)?;
            Ok(lpp::passage_time(&f, &PassageQuery::new((1, 1), (n, m)))?.value)
        })?;
        out.push(KsReport::two_sample(format!("exponential n={n} m={m} alpha={alpha}"), &half, &full, 0.02)?);
    }
    Ok(out)
}

/// Log-gamma version: `log Z` of the trapezoid against the boundary-column partition function.
pub fn suite_trapezoid_identity_log_gamma(n: i64, m: i64, alpha: f64, beta: f64, mc: &MCConfig) -> Result<KsReport> {
    if n < m || m < 1 {
        return domain(format!("need n ≥ m ≥ 1, got n={n}, m={m}"));
    }
    let half = mc.side(40).run(|s| {
        let f = LazyField::new(EnvironmentSpec::half_space_log_gamma(alpha, beta), s)?;
        Ok(polymer::trapezoid_log_partition(&f, n, m)?.log_z)
    })?;
    let full = mc.side(41).run(|s| {
        let f = LazyField::new(EnvironmentSpec::column_log_gamma(alpha, beta), s)?;
        Ok(polymer::log_partition(&f, &PassageQuery::new((1, 1), (n, m)))?.log_z)
    })?;
    KsReport::two_sample(format!("log-gamma n={n} m={m} alpha={alpha} beta={beta}"), &half, &full, 0.025)
}

/// Observables `X(p,q;r,s)` (or `log Z`) under `(γ₀, γ₁)` and under the swapped pair.
/// Also compares the rank correlation of the first two observables.
pub fn suite_permutation_invariance(
    kind: Kind,
    alpha: f64,
    theta: f64,
    gammas: (f64, f64),
    observables: &[(Point, Point)],
    mc: &MCConfig,
) -> Result<Vec<Check>> {
    for &((p, q), (r, s)) in observables {
        if p == 1 || q == 1 || r == 0 || s == 0 {
            return Err(Error::Config(format!("observable ({p},{q};{r},{s}) touches a swapped index")));
        }
        if p > r || q > s {
            return Err(Error::Config(format!("observable ({p},{q};{r},{s}) is not ordered")));
        }
    }
    let spec = |g0: f64, g1: f64| EnvironmentSpec::new(kind, alpha, theta).with_gamma(0, g0).with_gamma(1, g1);
    let sample = |spec: EnvironmentSpec, s: SeededSource| -> Result<Vec<f64>> {
        let f = LazyField::new(spec, s)?;
        observables
            .iter()
            .map(|&(u, v)| {
                let q = PassageQuery::new(u, v).with(Constraint::DiagonalCondition);
                if kind == Kind::LogGamma {
                    Ok(polymer::log_partition(&f, &q)?.log_z)
                } else {
                    Ok(lpp::passage_time(&f, &q)?.value)
                }
            })
            .collect()
    };
    let a = mc.side(50).run(|s| sample(spec(gammas.0, gammas.1), s))?;
    let b = mc.side(51).run(|s| sample(spec(gammas.1, gammas.0), s))?;
    let mut checks = Vec::new();
    for (k, &((p, q), (r, s))) in observables.iter().enumerate() {
        let label = format!("X({p},{q};{r},{s}) under swapped parameters");
        checks.push(KsReport::two_sample(label, &column(&a, k), &column(&b, k), 0.02)?.into());
    }
    if observables.len() >= 2 {
        let ra = stats::spearman(&column(&a, 0), &column(&a, 1));
        let rb = stats::spearman(&column(&b, 0), &column(&b, 1));
        checks.push(Check::below("rank correlation of the first two observables", (ra - rb).abs(), 0.03).with_n(a.len()));
    }
    Ok(checks)
}

/// Stationarity checks for each `(spec, h, range)`.
pub fn suite_stationary(specs: &[(StationaryMeasureSpec, i64, (i64, i64))], mc: &MCConfig) -> Result<Vec<KsReport>> {
    let mut out = Vec::new();
    for (k, (spec, h, range)) in specs.iter().enumerate() {
        let mut r = horizon::stationarity_check(spec, *h, *range, &mc.side(60 + k as u64))?;
        for x in &mut r {
            x.observable = format!("k={} {}", spec.k(), x.observable);
        }
        out.extend(r);
    }
    Ok(out)
}

/// Output increments of the stationary queue against `Exp(1/2 - β)` and their lag-1 correlation.
pub fn suite_burke(beta: f64, n: usize, mc: &MCConfig) -> Result<Vec<Check>> {
    let series = mc.side(70).run(|s| horizon::burke_sampler(beta, n, &s))?;
    let rate = 0.5 - beta;
    let mut checks = Vec::new();
    let mut positions = vec![1, n.div_ceil(2), n];
    positions.dedup();
    for j in positions {
        let xs = column(&series, j - 1);
        checks.push(KsReport::one_sample(format!("increment {j} vs Exp({rate})"), &xs, stats::exp_cdf(rate), 0.015)?.into());
    }
    let r = stats::lag1_autocorrelation(&series);
    checks.push(Check::below("|lag-1 autocorrelation|", r.abs(), 0.02).with_n(series.len()));
    Ok(checks)
}

/// `|mean X(1,1;n,n)/n - μ_α(n)/n|` per `α`.
pub fn suite_limit_shape(alphas: &[f64], n: i64, tol: f64, mc: &MCConfig) -> Result<Vec<Check>> {
    if n < 4 {
        return Err(Error::Config(format!("limit-shape needs n ≥ 4, got {n}")));
    }
    let mut checks = Vec::new();
    for (k, &alpha) in alphas.iter().enumerate() {
        let t = scan::shape_scan(alpha, &[n / 2, n], &mc.side(80 + k as u64))?;
        // remove the n^{-2/3} fluctuation-mean term by extrapolating mean/n from n/2 and n
        let (x1, x2) = ((t.rows[0][0]).powf(-2.0 / 3.0), (t.rows[1][0]).powf(-2.0 / 3.0));
        let (m1, m2) = (t.rows[0][2], t.rows[1][2]);
        let limit = (m2 * x1 - m1 * x2) / (x1 - x2);
        let gap = (limit - t.rows[1][3]).abs();
        checks.push(Check::below(format!("shape gap alpha={alpha} n={n}"), gap, tol).with_n(mc.replicas));
    }
    Ok(checks)
}

/// Log-log slope of the variance of `X(1,1;n,n)` against an interval, per `α`.
pub fn suite_exponent(cases: &[(f64, (f64, f64))], ns: &[i64], mc: &MCConfig) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    for (k, &(alpha, (lo, hi))) in cases.iter().enumerate() {
        let (_, fit) = scan::exponent_scan(alpha, ns, &mc.side(90 + k as u64))?;
        checks.push(Check::within(format!("variance exponent alpha={alpha}"), fit.slope, lo, hi).with_n(mc.replicas));
    }
    Ok(checks)
}

fn pick(st: &mut Stream, lo: i64, hi: i64) -> i64 {
    lo + ((st.uniform() * (hi - lo + 1) as f64) as i64).min(hi - lo)
}

fn ordered_pair(st: &mut Stream, lo: i64, hi: i64) -> (i64, i64) {
    let a = pick(st, lo, hi);
    let b = pick(st, lo, hi);
    (a.min(b), a.max(b))
}

/// Quadrangle inequalities and metric composition on sampled `size × size` fields.
pub fn suite_deterministic(fields: usize, size: i64, alpha: f64, mc: &MCConfig) -> Outcome {
    let mc = mc.with_replicas(fields);
    let counts = mc.side(100).run(|s| {
        let spec = EnvironmentSpec::half_space_exponential(alpha).with_window(Window::rect(size, size));
        let f = env::materialize(&spec, &s)?;
        let mut st = s.stream(&[crate::rng::tag::AUX, 1]);
        let mut fails = [0usize; 3];
        for _ in 0..3 {
            let (s0, t0) = ordered_pair(&mut st, 1, size);
            let x = ordered_pair(&mut st, s0, size);
            let y = ordered_pair(&mut st, t0, size);
            if !lpp::quadrangle_check_with(&f, x, y, (s0, t0), Constraint::HalfSpace)? {
                fails[0] += 1;
            }
            let a = 0.3 + 1.7 * st.uniform();
            let b = a + 1.5 * st.uniform();
            if !lpp::coupled_quadrangle_check(&f, a, b, x, y, (s0, t0))? {
                fails[1] += 1;
            }
        }
        for c in [Constraint::None, Constraint::HalfSpace] {
            let (j0, j1) = ordered_pair(&mut st, 1, size - 1);
            let j1 = j1.max(j0 + 1);
            let i0 = pick(&mut st, j0, size);
            let i1 = pick(&mut st, i0.max(j1), size);
            let r = pick(&mut st, j0, j1 - 1);
            if !lpp::metric_composition_check_with(&f, (i0, j0), (i1, j1), r, c)? {
                fails[2] += 1;
            }
        }
        Ok(fails)
    })?;
    let total = |k: usize| counts.iter().map(|c| c[k]).sum::<usize>();
    let checks = vec![
        Check::exact("half-space quadrangle", total(0), 3 * fields),
        Check::exact("coupled two-parameter quadrangle", total(1), 3 * fields),
        Check::exact("metric composition", total(2), 2 * fields),
    ];
    Ok((json!({"fields": fields, "size": size, "alpha": alpha}), checks))
}

/// Mean slope `R_1(T)/T` per `(ρ, λ)`, and the Brownian marginal at `λ = 2|ρ|`.
pub fn suite_horizon(
    slopes: &[(f64, f64)],
    slope_grid: HorizonGrid,
    slope_tol: f64,
    rho_marginal: f64,
    marginal_grid: HorizonGrid,
    marginal_mc: &MCConfig,
    mc: &MCConfig,
) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let t = slope_grid.t_max;
    for (k, &(rho, lambda)) in slopes.iter().enumerate() {
        let v = mc.side(110 + k as u64).run(|s| {
            let r = horizon::sample_horizon_marginals(rho, &[lambda], slope_grid, &s)?;
            r.value(0, t).ok_or_else(|| Error::Range("horizon end".into()))
        })?;
        let m = stats::mean(&v) / t;
        checks.push(Check::within(format!("R1({t})/{t} at rho={rho} lambda={lambda}"), m, lambda - slope_tol, lambda + slope_tol).with_n(v.len()));
    }
    if rho_marginal >= 0.0 {
        return domain("the Brownian marginal needs ρ < 0");
    }
    let lambda = -2.0 * rho_marginal;
    let xs = [marginal_grid.t_max / 2.0, marginal_grid.t_max];
    let v = marginal_mc.side(120).run(|s| {
        let r = horizon::sample_horizon_marginals(rho_marginal, &[lambda], marginal_grid, &s)?;
        xs.iter().map(|&x| r.value(0, x).ok_or_else(|| Error::Range("horizon end".into()))).collect::<Result<Vec<f64>>>()
    })?;
    for (k, &x) in xs.iter().enumerate() {
        let cdf = stats::normal_cdf(-2.0 * rho_marginal * x, 2.0 * x);
        let label = format!("R1({x}) vs N({}, {}) at rho={rho_marginal}", -2.0 * rho_marginal * x, 2.0 * x);
        checks.push(KsReport::one_sample(label, &column(&v, k), cdf, 0.02)?.into());
    }
    Ok(checks)
}

/// Height of clock-driven TASEP against the LPP inverse at sites `xs`.
pub fn suite_tasep_lpp(alpha: f64, t: f64, xs: &[usize], mc: &MCConfig) -> Result<Vec<KsReport>> {
    let x_max = xs.iter().copied().max().unwrap_or(0);
    let h0 = HeightFunction::narrow_wedge(0, x_max + 2);
    let sites = tasep::padded_sites(x_max, alpha, t);
    let clocks = mc.side(130).run(|s| {
        let c = ClockField::sample(1, alpha, sites, t, &s)?;
        let h = tasep::evolve_observed(&h0, &c, t, x_max)?;
        Ok(xs.iter().map(|&x| h.get(x) as f64).collect::<Vec<f64>>())
    })?;
    let lpp_side = mc.side(131).run(|s| {
        let f = LazyField::new(EnvironmentSpec::half_space_exponential(alpha), s)?;
        xs.iter().map(|&x| Ok(tasep::height_from_lpp(&f, &h0, t, x)? as f64)).collect::<Result<Vec<f64>>>()
    })?;
    xs.iter()
        .enumerate()
        .map(|(k, &x)| KsReport::two_sample(format!("h_{t}({x}) clocks vs LPP"), &column(&clocks, k), &column(&lpp_side, k), 0.03))
        .collect()
}

/// One-sided envelope checks on the upper tail and a shape regression on the lower tail.
pub fn suite_tail_bounds(
    upper: (f64, i64, &[f64]),
    lower: (f64, i64, &[f64]),
    mc: &MCConfig,
) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let (alpha, n, grid) = upper;
    let t = scan::tail_scan(alpha, n, grid, TailSide::Upper, &mc.side(140))?;
    let fit = t.meta["fit_index"].as_u64().map(|k| k as usize);
    let nrep = mc.replicas as f64;
    let mut violations = 0;
    let mut monotone = 0;
    for (k, row) in t.rows.iter().enumerate() {
        if k > 0 && row[1] > t.rows[k - 1][1] {
            monotone += 1;
        }
        if Some(k) == fit || fit.is_none() {
            continue;
        }
        let env = row[2];
        // sampling slack of three standard errors plus one count
        if row[1] > env + 3.0 * (env * (1.0 - env) / nrep).sqrt() + 1.0 / nrep {
            violations += 1;
        }
    }
    checks.push(Check::exact(format!("upper tail within fitted envelope alpha={alpha} n={n}"), violations, t.rows.len()));
    checks.push(Check::exact(format!("upper tail nonincreasing alpha={alpha} n={n}"), monotone, t.rows.len()));

    let (alpha, n, grid) = lower;
    let t = scan::tail_scan(alpha, n, grid, TailSide::Lower, &mc.side(141))?;
    let min_p = 10.0 / nrep;
    let pts: Vec<(f64, f64)> = t.rows.iter().filter(|r| r[1] >= min_p && r[1] <= 0.6).map(|r| (r[0] * r[0], r[1].ln())).collect();
    // too few replicas to resolve the lower tail is a failed check, not an error
    checks.push(Check::above(format!("lower tail usable grid points alpha={alpha} n={n}"), pts.len() as f64, 2.5));
    if pts.len() < 3 {
        return Ok(checks);
    }
    let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
    let (_, slope, r2) = stats::linear_fit(&x, &y);
    checks.push(Check::above(format!("shallow lower tail log P vs eps^2 R^2 alpha={alpha} n={n}"), r2, 0.9).with_n(x.len()));
    checks.push(Check::below(format!("shallow lower tail slope alpha={alpha} n={n}"), slope, 0.0));
    Ok(checks)
}

/// Spatial sub-Gaussian shape and temporal decay of two-point increments.
pub fn suite_two_point(alpha: f64, n: i64, z0: i64, r: i64, mc: &MCConfig) -> Result<Vec<Check>> {
    let (spatial, temporal) = scan::two_point_samples(alpha, n, z0, r, &mc.side(150))?;
    let r2 = match scan::tail_regression(&spatial, 8, 20.max(mc.replicas / 200)) {
        Ok((_, r2)) => r2,
        Err(Error::Domain(_)) => f64::NAN,
        Err(e) => return Err(e),
    };
    let mut checks = vec![Check::above(format!("spatial tail log P vs a^2 R^2 n={n} z0={z0}"), r2, 0.9)];
    let (z, _) = scan::two_point_samples(alpha, n, 0, r, &mc.side(151).with_replicas(mc.replicas.min(50)))?;
    checks.push(Check::exact("z0=0 increment vanishes", z.iter().filter(|&&x| x != 0.0).count(), z.len()));
    let mut abs: Vec<f64> = temporal.iter().map(|x| x.abs()).collect();
    abs.sort_by(f64::total_cmp);
    let a = abs[(0.7 * abs.len() as f64) as usize];
    let p1 = abs.iter().filter(|&&x| x >= a).count() as f64 / abs.len() as f64;
    let p2 = abs.iter().filter(|&&x| x >= 2.0 * a).count() as f64 / abs.len() as f64;
    checks.push(Check::below(format!("temporal tail ratio P(2a)/P(a) n={n} r={r}"), p2 / p1, (-1.0f64).exp()));
    Ok(checks)
}

fn run_named(name: &str, mc: &MCConfig) -> Outcome {
    match name {
        "rsk-isometry" => {
            let n = if mc.replicas == 0 { 1000 } else { mc.replicas };
            suite_rsk_isometry(n, 12, mc)
        }
        "tasep-metric-equivalence" => {
            let n = if mc.replicas == 0 { 200 } else { mc.replicas };
            suite_tasep_metric(&[1, 3], n, 10.0, 0.7, 30, mc)
        }
        "trapezoid-identity" => {
            let m1 = replicas(mc, 50_000);
            let m2 = replicas(mc, 20_000);
            let alphas = [0.4, 0.7, 1.2];
            let mut c = ks(suite_trapezoid_identity(8, 8, &alphas, &m1)?);
            c.push(suite_trapezoid_identity_log_gamma(5, 5, 1.0, 1.0, &m2)?.into());
            let p = json!({"exponential": {"n": 8, "m": 8, "alphas": alphas, "replicas": m1.replicas},
                           "log_gamma": {"n": 5, "m": 5, "alpha": 1.0, "beta": 1.0, "replicas": m2.replicas}});
            Ok((p, c))
        }
        "permutation-invariance" => {
            let m = replicas(mc, 50_000);
            let obs = [((0, 0), (3, 3)), ((0, 2), (3, 4))];
            let c = suite_permutation_invariance(Kind::Exponential, 0.5, 0.5, (0.2, 0.4), &obs, &m)?;
            Ok((json!({"kind": "exponential", "alpha": 0.5, "theta": 0.5, "gammas": [0.2, 0.4], "observables": obs, "replicas": m.replicas}), c))
        }
        "stationary" => {
            let m = replicas(mc, 20_000);
            let one = StationaryMeasureSpec::new(StationaryModel::ExponentialLpp, 0.8, 0.5, vec![-0.2]);
            let two = StationaryMeasureSpec::new(StationaryModel::ExponentialLpp, 0.8, 0.5, vec![-0.3, -0.1]);
            let specs = [(one, 3, (-3, 5)), (two, 3, (-3, 5))];
            let c = ks(suite_stationary(&specs, &m)?);
            Ok((json!({"alpha": 0.8, "theta": 0.5, "slopes": [[-0.2], [-0.3, -0.1]], "h": 3, "range": [-3, 5], "replicas": m.replicas}), c))
        }
        "burke" => {
            let m = replicas(mc, 50_000);
            Ok((json!({"beta": 0.25, "n": 50, "replicas": m.replicas}), suite_burke(0.25, 50, &m)?))
        }
        "limit-shape" => {
            let m = replicas(mc, 200);
            let alphas = [0.3, 0.5, 1.0];
            Ok((json!({"alphas": alphas, "n": 1000, "tol": 0.05, "replicas": m.replicas}), suite_limit_shape(&alphas, 1000, 0.05, &m)?))
        }
        "exponent" => {
            let m = replicas(mc, 2000);
            let ns = [250, 500, 1000, 2000];
            let cases = [(1.0, (0.55, 0.8)), (0.3, (0.9, 1.1))];
            Ok((json!({"ns": ns, "cases": cases, "replicas": m.replicas}), suite_exponent(&cases, &ns, &m)?))
        }
        "deterministic-inequalities" => {
            let n = if mc.replicas == 0 { 1000 } else { mc.replicas };
            suite_deterministic(n, 50, 0.7, mc)
        }
        "horizon" => {
            let m = replicas(mc, 2000);
            let mm = replicas(mc, 50_000);
            let slope_grid = HorizonGrid::new(50.0, 0.01)?;
            let marginal_grid = HorizonGrid::new(1.0, 1e-3)?;
            let slopes = [(0.0, 1.0), (-1.0, 0.5)];
            let c = suite_horizon(&slopes, slope_grid, 0.1, -0.5, marginal_grid, &mm, &m)?;
            let p = json!({"slopes": slopes, "slope_t": 50.0, "slope_delta": 0.01, "slope_tol": 0.1, "slope_replicas": m.replicas,
                           "marginal_rho": -0.5, "marginal_t": 1.0, "marginal_delta": 1e-3, "marginal_replicas": mm.replicas});
            Ok((p, c))
        }
        "exp-brownian-swap" => {
            let m = replicas(mc, 20_000);
            let pairs = [(0.0, 1.0), (-1.0, 0.5), (-2.0, 2.0)];
            let grid = HorizonGrid::new(2.0, 0.01)?;
            let r = horizon::exp_brownian_swap_check((1.0, 0.25), &pairs, grid, 30.0, &m)?;
            let mut c = ks(r.ks);
            c.push(Check::below("coupled two-line passage residual", r.coupling_residual, 1e-9));
            c.push(Check::within("fraction with max(B0'-B1') = X*", r.star_fraction, 0.95, 1.0));
            Ok((json!({"lambda": [1.0, 0.25], "pairs": pairs, "delta": 0.01, "star_horizon": 30.0, "replicas": m.replicas}), c))
        }
        "tasep-lpp" => {
            let m = replicas(mc, 4000);
            let xs = [0, 1, 4];
            Ok((json!({"alpha": 0.7, "t": 4.0, "xs": xs, "replicas": m.replicas}), ks(suite_tasep_lpp(0.7, 4.0, &xs, &m)?)))
        }
        "tail-bounds" => {
            let m = replicas(mc, 4000);
            let up = [0.03, 0.06, 0.09, 0.12, 0.15];
            let lo = [0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35];
            let c = suite_tail_bounds((1.0, 200, &up), (0.3, 200, &lo), &m)?;
            Ok((json!({"upper": {"alpha": 1.0, "n": 200, "eps": up}, "lower": {"alpha": 0.3, "n": 200, "eps": lo}, "replicas": m.replicas}), c))
        }
        "two-point" => {
            let m = replicas(mc, 4000);
            let n = 200;
            let z0 = (n as f64).powf(2.0 / 3.0).floor() as i64;
            Ok((json!({"alpha": 0.5, "n": n, "z0": z0, "r": n / 4, "replicas": m.replicas}), suite_two_point(0.5, n, z0, n / 4, &m)?))
        }
        other => Err(Error::Usage(format!("unknown suite '{other}'; known suites: {}, all", SUITES.join(", ")))),
    }
}

/// Runs a named suite, or every suite for `"all"`. `cfg.replicas = 0` keeps each
/// suite's default sample sizes.
pub fn run_suite(name: &str, cfg: &MCConfig) -> Result<SuiteReport> {
    let start = Instant::now();
    let (params, checks) = if name == "all" {
        let mut params = serde_json::Map::new();
        let mut checks = Vec::new();
        for s in SUITES {
            let (p, c) = run_named(s, cfg)?;
            params.insert(s.to_string(), p);
            checks.extend(c.into_iter().map(|mut c| {
                c.label = format!("{s}: {}", c.label);
                c
            }));
        }
        (Value::Object(params), checks)
    } else {
        run_named(name, cfg)?
    };
    let params = match params {
        Value::Object(m) => m,
        other => serde_json::Map::from_iter([("value".to_string(), other)]),
    };
    let pass = checks.iter().all(|c| c.pass);
    Ok(SuiteReport {
        suite: name.to_string(),
        seed: cfg.seed,
        replicas: cfg.replicas,
        workers: cfg.workers,
        params,
        checks,
        pass,
        elapsed_s: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_a_usage_error() {
        assert!(matches!(run_suite("bogus", &MCConfig::new(10, 1)), Err(Error::Usage(_))));
    }

    #[test]
    fn rsk_suite_passes() {
        let r = run_suite("rsk-isometry", &MCConfig::new(100, 1)).unwrap();
        assert!(r.pass, "{}", r.to_json());
        assert_eq!(r.checks.len(), 2);
    }

    #[test]
    fn forbidden_observables() {
        let mc = MCConfig::new(10, 1);
        let r = suite_permutation_invariance(Kind::Exponential, 0.5, 0.5, (0.2, 0.4), &[((1, 0), (3, 3))], &mc);
        assert!(matches!(r, Err(Error::Config(_))));
        let r = suite_permutation_invariance(Kind::Exponential, 0.5, 0.5, (0.2, 0.4), &[((2, 2), (3, 0))], &mc);
        assert!(matches!(r, Err(Error::Config(_))));
    }

    #[test]
    fn equal_parameters_give_equal_laws() {
        let mc = MCConfig::new(4000, 2);
        let c = suite_permutation_invariance(Kind::Exponential, 0.5, 0.5, (0.3, 0.3), &[((0, 0), (3, 3))], &mc).unwrap();
        assert!(c.iter().all(|c| c.pass));
    }

    #[test]
    fn small_deterministic_suites() {
        let r = run_suite("tasep-metric-equivalence", &MCConfig::new(5, 3)).unwrap();
        assert!(r.pass, "{}", r.to_json());
        let r = run_suite("deterministic-inequalities", &MCConfig::new(20, 3)).unwrap();
        assert!(r.pass, "{}", r.to_json());
    }
}
