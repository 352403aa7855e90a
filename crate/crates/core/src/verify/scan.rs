//! Plot-ready tables of Monte Carlo statistics: shapes, variances, tails, increments.

use serde::{Deserialize, Serialize};

use super::mc::MCConfig;
use super::stats::{linear_fit, mean, variance};
use crate::env::{EnvironmentSpec, LazyField, SeededSource};
use crate::error::{domain, Result};
use crate::lpp::{self, Constraint};
use crate::scaling::{self, ExponentFit};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub meta: serde_json::Value,
}

impl Table {
    pub fn new(columns: &[&str], meta: serde_json::Value) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new(), meta }
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// CSV with the metadata as a leading `#` comment line.
    pub fn to_csv(&self) -> String {
        let mut out = format!("# {}\n{}\n", self.meta, self.columns.join(","));
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// `X(1,1;n,n)` in the half-space exponential field.
pub fn diagonal_passage(alpha: f64, n: i64, source: SeededSource) -> Result<f64> {
    let field = LazyField::new(EnvironmentSpec::half_space_exponential(alpha), source)?;
    lpp::passage_value_streaming(&field, (1, 1), (n, n), Constraint::HalfSpace)
}

/// Samples of `X(1,1;n,n)`, one vector per `n`. Every `n` uses the same fields.
pub fn diagonal_samples(alpha: f64, ns: &[i64], mc: &MCConfig) -> Result<Vec<Vec<f64>>> {
    if ns.is_empty() || ns.iter().any(|&n| n < 1) {
        return domain("sizes must be a nonempty list of positive integers");
    }
    let per = mc.run(|s| ns.iter().map(|&n| diagonal_passage(alpha, n, s)).collect::<Result<Vec<f64>>>())?;
    Ok((0..ns.len()).map(|k| per.iter().map(|r| r[k]).collect()).collect())
}

/// `n, mean, mean/n, shape/n, sd` for each `n`.
pub fn shape_scan(alpha: f64, ns: &[i64], mc: &MCConfig) -> Result<Table> {
    let samples = diagonal_samples(alpha, ns, mc)?;
    let meta = serde_json::json!({"scan": "shape", "alpha": alpha, "replicas": mc.replicas, "seed": mc.seed});
    let mut t = Table::new(&["n", "mean", "mean_over_n", "shape_over_n", "sd"], meta);
    for (&n, xs) in ns.iter().zip(&samples) {
        let nf = n as f64;
        let m = mean(xs);
        t.rows.push(vec![nf, m, m / nf, scaling::mu_alpha(alpha, nf)? / nf, variance(xs).sqrt()]);
    }
    Ok(t)
}

/// `n, mean, var` per size and the log-log slope of the variance.
pub fn exponent_scan(alpha: f64, ns: &[i64], mc: &MCConfig) -> Result<(Table, ExponentFit)> {
    let samples = diagonal_samples(alpha, ns, mc)?;
    let meta = serde_json::json!({"scan": "exponent", "alpha": alpha, "replicas": mc.replicas, "seed": mc.seed});
    let mut t = Table::new(&["n", "mean", "var"], meta);
    let mut pts = Vec::new();
    for (&n, xs) in ns.iter().zip(&samples) {
        let v = variance(xs);
        t.rows.push(vec![n as f64, mean(xs), v]);
        pts.push((n as f64, v));
    }
    let fit = scaling::fit_exponent(&pts)?;
    Ok((t, fit))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailSide {
    /// `P(X ≥ μ_α(n) + εn)`.
    Upper,
    /// `P(X ≤ μ_α(n) - εn)`.
    Lower,
}

/// Envelope shape `ε^{3/2} n (1 ∧ ε^{1/2}/((1/2-α)∨0))` for the upper tail and
/// `ε² n / (1/2 - α)` for the shallow lower tail.
pub fn tail_rate(side: TailSide, alpha: f64, n: f64, eps: f64) -> f64 {
    let gap = (0.5 - alpha).max(0.0);
    match side {
        TailSide::Upper => {
            let g = if gap == 0.0 { 1.0 } else { (eps.sqrt() / gap).min(1.0) };
            eps.powf(1.5) * n * g
        }
        TailSide::Lower => eps * eps * n / gap,
    }
}

/// Empirical tail probabilities of `X(1,1;n,n)` around `μ_α(n)`, with the one-constant
/// envelope `2 exp(-ĉ · rate)` fitted at the first grid point with `0 < p < 1`.
pub fn tail_scan(alpha: f64, n: i64, eps_grid: &[f64], side: TailSide, mc: &MCConfig) -> Result<Table> {
    if eps_grid.is_empty() {
        return domain("empty ε grid");
    }
    if eps_grid.iter().any(|&e| !(e > 0.0)) || eps_grid.windows(2).any(|w| w[1] <= w[0]) {
        return domain("ε grid must be positive and increasing");
    }
    if side == TailSide::Lower && alpha >= 0.5 {
        return domain("the shallow lower tail needs α < 1/2");
    }
    let xs = &diagonal_samples(alpha, &[n], mc)?[0];
    let nf = n as f64;
    let mu = scaling::mu_alpha(alpha, nf)?;
    let total = xs.len() as f64;
    let probs: Vec<f64> = eps_grid
        .iter()
        .map(|&e| {
            let hits = match side {
                TailSide::Upper => xs.iter().filter(|&&x| x >= mu + e * nf).count(),
                TailSide::Lower => xs.iter().filter(|&&x| x <= mu - e * nf).count(),
            };
            hits as f64 / total
        })
        .collect();
    let fit = eps_grid.iter().zip(&probs).position(|(_, &p)| p > 0.0 && p < 1.0);
    let c_hat = fit.map(|k| -(probs[k] / 2.0).ln() / tail_rate(side, alpha, nf, eps_grid[k]));
    let meta = serde_json::json!({
        "scan": "tails", "alpha": alpha, "n": n, "side": side, "mu": mu,
        "replicas": mc.replicas, "seed": mc.seed, "c_hat": c_hat, "fit_index": fit,
    });
    let mut t = Table::new(&["eps", "probability", "envelope", "rate"], meta);
    for (&e, &p) in eps_grid.iter().zip(&probs) {
        let rate = tail_rate(side, alpha, nf, e);
        let env = c_hat.map_or(1.0, |c| (2.0 * (-c * rate).exp()).min(1.0));
        t.rows.push(vec![e, p, env, rate]);
    }
    Ok(t)
}

/// Spatial and temporal two-point increments of half-space exponential LPP from the
/// diagonal: `max_{z ≤ z0} |X̄(1,1;n+z,n) - X̄(1,1;n,n)|` with `X̄ = X - ν_α`, and
/// `X̄(0,0;n,n) - X̄(0,0;n+r,n+r)` with `X̄ = X - μ_α`.
pub fn two_point_samples(alpha: f64, n: i64, z0: i64, r: i64, mc: &MCConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 || z0 < 0 || r < 1 {
        return domain(format!("need n ≥ 2, z0 ≥ 0, r ≥ 1, got n={n}, z0={z0}, r={r}"));
    }
    let nf = n as f64;
    let pairs = mc.run(|s| {
        let field = LazyField::new(EnvironmentSpec::half_space_exponential(alpha), s)?;
        let row = lpp::row_values(&field, (1, 1), n + z0, n, Constraint::HalfSpace)?;
        let base = row[(n - 1) as usize] - scaling::nu_alpha(alpha, nf, nf)?;
        let mut spatial: f64 = 0.0;
        for z in 0..=z0 {
            let v = row[(n + z - 1) as usize] - scaling::nu_alpha(alpha, nf + z as f64, nf)?;
            spatial = spatial.max((v - base).abs());
        }
        let diag = lpp::diagonal_values(&field, (0, 0), n + r, Constraint::HalfSpace)?;
        let a = diag[n as usize] - scaling::mu_alpha(alpha, nf + 1.0)?;
        let b = diag[(n + r) as usize] - scaling::mu_alpha(alpha, (n + r + 1) as f64)?;
        Ok((spatial, a - b))
    })?;
    Ok(pairs.into_iter().unzip())
}

/// Empirical `P(M ≥ a)` at `points` levels between the median of `M` and the level
/// exceeded by `min_hits` samples, with the fit of `log P` against `a²`.
pub fn tail_regression(m: &[f64], points: usize, min_hits: usize) -> Result<(Vec<(f64, f64)>, f64)> {
    let mut v = m.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n < 2 * min_hits || points < 3 {
        return domain("too few samples for a tail regression");
    }
    let lo = v[n / 2];
    let hi = v[n - min_hits];
    if !(hi > lo) {
        return domain("degenerate sample");
    }
    let mut rows = Vec::with_capacity(points);
    for k in 0..points {
        let a = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let p = v.iter().filter(|&&x| x >= a).count() as f64 / n as f64;
        rows.push((a, p));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.0 * r.0).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    Ok((rows, linear_fit(&xs, &ys).2))
}

pub fn two_point_scan(alpha: f64, n: i64, z0: i64, r: i64, mc: &MCConfig) -> Result<Table> {
    let (spatial, temporal) = two_point_samples(alpha, n, z0, r, mc)?;
    let (rows, r2) = tail_regression(&spatial, 8, 20.max(mc.replicas / 200))?;
    let abs_t: Vec<f64> = temporal.iter().map(|x| x.abs()).collect();
    let meta = serde_json::json!({
        "scan": "two-point", "alpha": alpha, "n": n, "z0": z0, "r": r,
        "replicas": mc.replicas, "seed": mc.seed, "spatial_r2": r2,
    });
    let mut t = Table::new(&["a", "spatial_tail", "temporal_tail"], meta);
    for (a, p) in rows {
        let q = abs_t.iter().filter(|&&x| x >= a).count() as f64 / abs_t.len() as f64;
        t.rows.push(vec![a, p, q]);
    }
    Ok(t)
}
