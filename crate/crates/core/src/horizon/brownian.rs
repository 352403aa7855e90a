//! Exponential-Brownian constructions: marginals of the half-space stationary horizon and
//! the two-line slope swap.

use std::collections::BTreeMap;

use super::cadlag::{BrownianPart, CadlagEnvironment, CadlagLine};
use super::HorizonSample;
use crate::env::SeededSource;
use crate::error::{domain, Result};
use crate::lpp::NEG;
use crate::rng::tag;
use crate::verify::{KsReport, MCConfig};

/// Spatial grid `x = mδ`, `|m| ≤ T/δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HorizonGrid {
    pub t_max: f64,
    pub delta: f64,
}

impl HorizonGrid {
    pub fn new(t_max: f64, delta: f64) -> Result<Self> {
        if !(delta > 0.0 && t_max >= 0.0 && t_max.is_finite()) {
            return domain(format!("bad grid T={t_max}, δ={delta}"));
        }
        Ok(HorizonGrid { t_max, delta })
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.delta).round() as usize
    }
}

fn atom_rate(lambdas: &[f64], rho: f64, i: usize, j: usize) -> f64 {
    let k = lambdas.len();
    let l = |n: usize| lambdas[n - 1];
    if j <= k {
        l(i) / 2.0 - l(j) / 2.0
    } else if j <= 2 * k - i {
        l(i) / 2.0 + l(2 * k + 1 - j) / 2.0
    } else {
        l(i) / 2.0 - rho
    }
}

/// The `2k`-line environment: drifts `λ_i` on line `i` and `-λ_i` on line `2k+1-i`, with
/// atoms `X(-i, j)`. The atom at `(-k, k+1)` is left at `0` when its rate vanishes.
pub fn horizon_environment(
    rho: f64,
    lambdas: &[f64],
    grid: HorizonGrid,
    source: &SeededSource,
) -> Result<CadlagEnvironment> {
    let k = lambdas.len();
    if k == 0 {
        return domain("at least one slope is required");
    }
    let floor = (2.0 * rho).max(0.0);
    if rho.is_nan() || rho == f64::INFINITY || lambdas.iter().any(|l| !l.is_finite()) {
        return domain("ρ must be real or -∞ and slopes finite");
    }
    if !(lambdas.windows(2).all(|w| w[0] > w[1]) && lambdas[k - 1] >= floor) {
        return domain(format!("slopes {lambdas:?} must decrease and stay ≥ 2ρ ∨ 0 = {floor}"));
    }
    let steps = grid.steps();
    let mut lines = Vec::with_capacity(2 * k);
    for j in 1..=2 * k {
        let drift = if j <= k { lambdas[j - 1] } else { -lambdas[2 * k - j] };
        let mut stream = source.stream(&[tag::BROWNIAN, j as u64]);
        let brownian = BrownianPart::sample(drift, grid.delta, steps, &mut stream);
        let mut atoms = BTreeMap::new();
        for i in 1..=k.min(j - 1) {
            if j > 2 * k + 1 - i {
                continue;
            }
            let rate = atom_rate(lambdas, rho, i, j);
            let a = if rate > 0.0 { source.stream(&[tag::ATOM, i as u64, j as u64]).exp(rate) } else { 0.0 };
            atoms.insert(-(i as i64), a);
        }
        lines.push(CadlagLine { atoms, brownian });
    }
    CadlagEnvironment::new(1, lines)
}

/// `R^DL_i(x)` on the grid `x ∈ [-T, T]`.
pub fn sample_horizon_marginals(
    rho: f64,
    lambdas: &[f64],
    grid: HorizonGrid,
    source: &SeededSource,
) -> Result<HorizonSample> {
    let env = horizon_environment(rho, lambdas, grid, source)?;
    let k = lambdas.len() as i64;
    let top = 2 * k;
    let n = grid.steps();
    let mut processes = Vec::with_capacity(k as usize);
    for i in 1..=k {
        let saturated = i == k && atom_rate(lambdas, rho, k as usize, k as usize + 1) <= 0.0;
        let (pos, neg) = if saturated {
            let from = ((1 - k) as f64, k + 1);
            let z = env.zero_index(from.0)?;
            let p = env.profile(from, top, None)?;
            let pos: Vec<f64> = (0..=n).map(|m| p[z + m] - p[z]).collect();
            (pos.clone(), pos)
        } else {
            let from = (-i as f64, i);
            let z = env.zero_index(from.0)?;
            let p = env.profile(from, top, None)?;
            let q = env.profile(from, top, Some(top + 1))?;
            let base = p[z];
            let pos: Vec<f64> = (0..=n).map(|m| p[z + m] - base).collect();
            let neg: Vec<f64> = (0..=n).map(|m| q[z + m] - base).collect();
            (pos, neg)
        };
        let mut row: Vec<f64> = neg[1..].iter().rev().copied().collect();
        row.extend_from_slice(&pos);
        if row.iter().any(|v| !v.is_finite()) {
            return domain(format!("R_{i} is not finite"));
        }
        processes.push(row);
    }
    let xs = (-(n as i64)..=n as i64).map(|m| m as f64 * grid.delta).collect();
    Ok(HorizonSample { slopes: lambdas.to_vec(), xs, processes })
}

/// The explicit coupling of a two-line Brownian environment with its slope-swapped
/// version, on a grid refined so that every path is linear between consecutive points.
#[derive(Debug, Clone, PartialEq)]
pub struct SwapPaths {
    pub t: Vec<f64>,
    pub b0: Vec<f64>,
    pub b1: Vec<f64>,
    pub b0_swapped: Vec<f64>,
    pub b1_swapped: Vec<f64>,
    pub x_star: f64,
}

/// `B₁' = B₁ + (M - X⋆)⁺` and `B₀' = B₀ - (M - X⋆)⁺`, where `M` is the running maximum of
/// `B₀ - B₁`. Crossing points of `B₀ - B₁` with its running maximum and with `X⋆` are
/// inserted into the grid first.
pub fn swap_coupling(t: &[f64], b0: &[f64], b1: &[f64], x_star: f64) -> SwapPaths {
    let mut tt = vec![t[0]];
    let mut v0 = vec![b0[0]];
    let mut v1 = vec![b1[0]];
    let mut run = b0[0] - b1[0];
    for m in 1..t.len() {
        let d_prev = b0[m - 1] - b1[m - 1];
        let d = b0[m] - b1[m];
        let mut cuts: Vec<f64> = Vec::new();
        for level in [run, x_star] {
            if d_prev < level && d > level {
                cuts.push((level - d_prev) / (d - d_prev));
            }
        }
        cuts.sort_by(f64::total_cmp);
        for s in cuts {
            if s > 0.0 && s < 1.0 {
                tt.push(t[m - 1] + s * (t[m] - t[m - 1]));
                v0.push(b0[m - 1] + s * (b0[m] - b0[m - 1]));
                v1.push(b1[m - 1] + s * (b1[m] - b1[m - 1]));
            }
        }
        tt.push(t[m]);
        v0.push(b0[m]);
        v1.push(b1[m]);
        run = run.max(d);
    }
    let mut max = NEG;
    let mut b0s = Vec::with_capacity(tt.len());
    let mut b1s = Vec::with_capacity(tt.len());
    for k in 0..tt.len() {
        max = max.max(v0[k] - v1[k]);
        let phi = (max - x_star).max(0.0);
        b0s.push(v0[k] - phi);
        b1s.push(v1[k] + phi);
    }
    SwapPaths { t: tt, b0: v0, b1: v1, b0_swapped: b0s, b1_swapped: b1s, x_star }
}

/// Two-line Brownian passage `max_{x ≤ z ≤ y} B₀(z) - B₀(x) + B₁(y) - B₁(z)` with
/// `x`, `y` given as grid indices.
pub fn two_line_passage(b0: &[f64], b1: &[f64], x: usize, y: usize) -> f64 {
    (x..=y).map(|z| b0[z] - b0[x] + b1[y] - b1[z]).fold(NEG, f64::max)
}

impl SwapPaths {
    /// Largest `|B(x,y) - B'(x,y)|` over all grid pairs `x ≤ y` drawn from `every`-th point.
    pub fn passage_residual(&self, every: usize) -> f64 {
        let idx: Vec<usize> = (0..self.t.len()).step_by(every.max(1)).collect();
        let mut worst: f64 = 0.0;
        for (a, &x) in idx.iter().enumerate() {
            for &y in &idx[a..] {
                let p = two_line_passage(&self.b0, &self.b1, x, y);
                let q = two_line_passage(&self.b0_swapped, &self.b1_swapped, x, y);
                worst = worst.max((p - q).abs());
            }
        }
        worst
    }

    /// `|X⋆ - max_{x ≤ T} (B₀' - B₁')(x)|`.
    pub fn star_residual(&self) -> f64 {
        let m = self.b0_swapped.iter().zip(&self.b1_swapped).map(|(a, b)| a - b).fold(NEG, f64::max);
        (self.x_star - m).abs()
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SwapReport {
    pub ks: Vec<KsReport>,
    /// Worst `|B(x,y) - B'(x,y)|` over coupled replicas.
    pub coupling_residual: f64,
    /// Fraction of replicas with `|X⋆ - max(B₀' - B₁')| < 0.01` at horizon `star_horizon`.
    pub star_fraction: f64,
    pub star_horizon: f64,
    pub pass: bool,
}

/// Two-line exponential-Brownian environment with lines `0, 1`, drifts `(λ₀, λ₁)` and
/// atoms `Exp(β - λ_j/2)` at positions `-atoms..-1`.
pub fn swap_environment(
    lambda: (f64, f64),
    beta: f64,
    atoms: i64,
    grid: HorizonGrid,
    source: &SeededSource,
) -> Result<CadlagEnvironment> {
    let lines = [lambda.0, lambda.1]
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let mut stream = source.stream(&[tag::BROWNIAN, j as u64]);
            let brownian = BrownianPart::sample(l, grid.delta, grid.steps(), &mut stream);
            let atoms = (-atoms..0)
                .map(|p| (p, source.stream(&[tag::ATOM, p as u64, j as u64]).exp(beta - l / 2.0)))
                .collect();
            CadlagLine { atoms, brownian }
        })
        .collect();
    CadlagEnvironment::new(0, lines)
}

/// Compares `XB(x,0;y,1)` under `(λ₀, λ₁)` and under swapped slopes at each pair, and
/// checks the explicit coupling on `min(N, 1000)` replicas.
pub fn exp_brownian_swap_check(
    lambda: (f64, f64),
    pairs: &[(f64, f64)],
    grid: HorizonGrid,
    star_horizon: f64,
    mc: &MCConfig,
) -> Result<SwapReport> {
    let (l0, l1) = lambda;
    if !(l0 > l1) {
        return domain(format!("need λ₀ > λ₁, got {lambda:?}"));
    }
    let beta = (l0 / 2.0).max(0.0) + 1.0;
    let atoms = pairs.iter().map(|p| (-p.0).ceil() as i64).max().unwrap_or(0).max(1);
    let t_need = pairs.iter().map(|p| p.1).fold(0.0, f64::max);
    let g = HorizonGrid::new(t_need.max(grid.delta), grid.delta)?;
    let sample = |lam: (f64, f64), s: SeededSource| -> Result<Vec<f64>> {
        let env = swap_environment(lam, beta, atoms, g, &s)?;
        pairs.iter().map(|&(x, y)| env.passage((x, 0), (y, 1), None)).collect()
    };
    let a = mc.run(|s| sample((l0, l1), s.side(1)))?;
    let b = mc.run(|s| sample((l1, l0), s.side(2)))?;
    let mut ks = Vec::new();
    for (n, &(x, y)) in pairs.iter().enumerate() {
        let xa: Vec<f64> = a.iter().map(|r| r[n]).collect();
        let xb: Vec<f64> = b.iter().map(|r| r[n]).collect();
        ks.push(KsReport::two_sample(format!("XB({x},0;{y},1)"), &xa, &xb, 0.02)?);
    }
    let coupled = mc.with_replicas(mc.replicas.min(1000)).side(3);
    let long = HorizonGrid::new(star_horizon, grid.delta.max(1e-2))?;
    let rate = (l0 - l1) / 2.0;
    let residuals = coupled.run(|s| {
        let b0 = BrownianPart::sample(l0, long.delta, long.steps(), &mut s.stream(&[tag::BROWNIAN, 0]));
        let b1 = BrownianPart::sample(l1, long.delta, long.steps(), &mut s.stream(&[tag::BROWNIAN, 1]));
        let x_star = s.stream(&[tag::ATOM]).exp(rate);
        let t: Vec<f64> = (0..b0.values.len()).map(|m| m as f64 * long.delta).collect();
        let c = swap_coupling(&t, &b0.values, &b1.values, x_star);
        // pairwise check on a coarse sub-grid keeps this quadratic step cheap
        let every = (c.t.len() / 60).max(1);
        Ok((c.passage_residual(every), c.star_residual()))
    })?;
    let coupling_residual = residuals.iter().map(|r| r.0).fold(0.0, f64::max);
    let star_fraction = residuals.iter().filter(|r| r.1 < 0.01).count() as f64 / residuals.len().max(1) as f64;
    let pass = ks.iter().all(|r| r.pass) && coupling_residual < 1e-9 && star_fraction >= 0.95;
    Ok(SwapReport { ks, coupling_residual, star_fraction, star_horizon, pass })
}
