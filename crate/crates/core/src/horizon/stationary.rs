//! Joint stationary processes for the extended half-space models, built from LPP or
//! polymer values out of the anti-diagonal cells `(2k+1-i, i)`.
//!
//! At `ε = 0` the start cells carry infinite weight. Every path to the L-shape passes
//! through its start cell, so the weight cancels in the increment and the start is
//! simply excluded. When `γ_k = α` the diagonal cell `(k+1,k+1)` also blows up and
//! dominates, so `R_k` is computed from `(k+1,k+1)` instead.

use serde::{Deserialize, Serialize};

use super::HorizonSample;
use crate::env::{EnvironmentSpec, Kind, LazyField, SeededSource, Weights};
use crate::error::{domain, Result};
use crate::lpp::{self, Algebra, BoundaryFunction, Constraint};
use crate::verify::{KsReport, MCConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationaryModel {
    ExponentialLpp,
    GeometricLpp,
    LogGamma,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryMeasureSpec {
    pub model: StationaryModel,
    pub alpha: f64,
    pub theta: f64,
    /// `γ_1 < … < γ_k` (exponential, log-gamma) or `γ_1 > … > γ_k` (geometric).
    pub slopes: Vec<f64>,
    /// `0` requests the limiting process.
    #[serde(default)]
    pub epsilon: f64,
}

impl StationaryMeasureSpec {
    pub fn new(model: StationaryModel, alpha: f64, theta: f64, slopes: Vec<f64>) -> Self {
        StationaryMeasureSpec { model, alpha, theta, slopes, epsilon: 0.0 }
    }

    pub fn k(&self) -> usize {
        self.slopes.len()
    }

    fn kind(&self) -> Kind {
        match self.model {
            StationaryModel::ExponentialLpp => Kind::Exponential,
            StationaryModel::GeometricLpp => Kind::Geometric,
            StationaryModel::LogGamma => Kind::LogGamma,
        }
    }

    pub fn algebra(&self) -> Algebra {
        match self.model {
            StationaryModel::LogGamma => Algebra::LogSum,
            _ => Algebra::MaxPlus,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (a, t, g, e) = (self.alpha, self.theta, &self.slopes, self.epsilon);
        if g.is_empty() {
            return domain("at least one slope is required");
        }
        if [a, t, e].iter().chain(g).any(|x| !x.is_finite()) {
            return domain("parameters must be finite");
        }
        if e < 0.0 {
            return domain(format!("ε={e} must be nonnegative"));
        }
        match self.model {
            StationaryModel::ExponentialLpp | StationaryModel::LogGamma => {
                if !(t > 0.0 && t > -a) {
                    return domain(format!("need θ > 0 ∨ -α, got θ={t}, α={a}"));
                }
                let top = a.min(0.0);
                if !(g[0] > -t && g.windows(2).all(|w| w[0] < w[1]) && g[g.len() - 1] <= top) {
                    return domain(format!("slopes {g:?} must satisfy -θ < γ_1 < … < γ_k ≤ {top}"));
                }
            }
            StationaryModel::GeometricLpp => {
                if !(a > 0.0 && t > 0.0 && t < (1.0 / a).min(1.0)) {
                    return domain(format!("need α > 0 and 0 < θ < (1/α) ∧ 1, got α={a}, θ={t}"));
                }
                let bottom = a.max(1.0);
                if !(g[0] < 1.0 / t && g.windows(2).all(|w| w[0] > w[1]) && g[g.len() - 1] >= bottom) {
                    return domain(format!("slopes {g:?} must satisfy 1/θ > γ_1 > … > γ_k ≥ {bottom}"));
                }
                if e >= 1.0 {
                    return domain(format!("ε={e} must be below 1"));
                }
            }
        }
        Ok(())
    }

    fn partner(&self, g: f64) -> f64 {
        match self.model {
            StationaryModel::GeometricLpp => (1.0 - self.epsilon) / g,
            _ => self.epsilon - g,
        }
    }

    /// The extended field: `γ_i` on `[1,k]`, partners on `[k+1,2k]`, `θ` elsewhere.
    pub fn environment(&self) -> EnvironmentSpec {
        let k = self.k() as i64;
        let mut spec = EnvironmentSpec::new(self.kind(), self.alpha, self.theta);
        for (n, &g) in self.slopes.iter().enumerate() {
            let i = n as i64 + 1;
            spec = spec.with_gamma(i, g).with_gamma(2 * k + 1 - i, self.partner(g));
        }
        spec
    }

    /// The homogeneous field (`γ ≡ θ`) whose dynamics the process is stationary for.
    pub fn evolution_environment(&self) -> EnvironmentSpec {
        EnvironmentSpec::new(self.kind(), self.alpha, self.theta)
    }

    /// `γ_k = α`, the case where `(k+1,k+1)` blows up at `ε = 0`.
    fn saturated(&self) -> bool {
        self.epsilon == 0.0 && self.slopes[self.k() - 1] == self.alpha
    }
}

/// `R_i(j)` for `i ∈ [1,k]`, `j ∈ [range.0, range.1]`. Log-gamma values are log-ratios.
pub fn sample_joint_stationary(
    spec: &StationaryMeasureSpec,
    range: (i64, i64),
    source: &SeededSource,
) -> Result<HorizonSample> {
    spec.validate()?;
    let (j_min, j_max) = range;
    if j_min > j_max {
        return domain(format!("empty range {range:?}"));
    }
    let field = LazyField::new(spec.environment(), *source)?;
    let k = spec.k() as i64;
    let corner = (2 * k + j_max.max(0), 2 * k + (-j_min).max(0));
    let mut processes = Vec::with_capacity(spec.k());
    for i in 1..=k {
        let start = if i == k && spec.saturated() { (k + 1, k + 1) } else { (2 * k + 1 - i, i) };
        let grid = lpp::point_grid(&field, spec.algebra(), start, corner, Constraint::DiagonalCondition, false)?;
        let base = grid.at((2 * k, 2 * k));
        let row: Vec<f64> = (j_min..=j_max).map(|j| grid.at(lpp::l_point(j, 2 * k)) - base).collect();
        if row.iter().any(|v| !v.is_finite()) {
            return domain(format!("R_{i} is not finite; an unexpected weight blew up"));
        }
        processes.push(row);
    }
    Ok(HorizonSample {
        slopes: spec.slopes.clone(),
        xs: (j_min..=j_max).map(|j| j as f64).collect(),
        processes,
    })
}

/// Increments `X^F(0,0;[j,h]_L) - X^F(0,0;[0,h]_L)` of a boundary profile evolved for
/// `h` levels in `field` (log-ratios for log-gamma). `h = 0` returns `F(j) - F(0)`.
pub fn evolve<W: Weights + ?Sized>(
    spec: &StationaryMeasureSpec,
    field: &W,
    f: &BoundaryFunction,
    h: i64,
    js: &[i64],
) -> Result<Vec<f64>> {
    if h < 0 {
        return domain(format!("h={h} must be nonnegative"));
    }
    if h == 0 {
        let f0 = f.eval(0).ok_or_else(|| crate::Error::Domain("F(0) undefined".into()))?;
        return js
            .iter()
            .map(|&j| f.eval(j).map(|v| v - f0).ok_or_else(|| crate::Error::Domain(format!("F({j}) undefined"))))
            .collect();
    }
    let mut all = js.to_vec();
    all.push(0);
    let v = lpp::seeded_profile(field, f, h, &all, spec.algebra())?;
    let base = v[v.len() - 1];
    Ok(v[..js.len()].iter().map(|x| x - base).collect())
}

/// Two-sample KS of the evolved increments against fresh stationary increments, per
/// component and per `j ≠ 0` in `range`.
pub fn stationarity_check(
    spec: &StationaryMeasureSpec,
    h: i64,
    range: (i64, i64),
    mc: &MCConfig,
) -> Result<Vec<KsReport>> {
    spec.validate()?;
    if h < 0 {
        return domain(format!("h={h} must be nonnegative"));
    }
    let (j_min, j_max) = range;
    let js: Vec<i64> = (j_min..=j_max).filter(|&j| j != 0).collect();
    let wide = (j_min.min(0) - h, j_max.max(0) + h);
    let k = spec.k();
    let evo_spec = spec.evolution_environment();
    let pairs = mc.run(|s| {
        let f = sample_joint_stationary(spec, wide, &s.side(1))?;
        let fresh = sample_joint_stationary(spec, (j_min, j_max), &s.side(3))?;
        let field = LazyField::new(evo_spec.clone(), s.side(2))?;
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let bf = BoundaryFunction::new(wide.0, f.processes[i].clone());
            let evolved = evolve(spec, &field, &bf, h, &js)?;
            let reference: Vec<f64> = js.iter().map(|&j| fresh.processes[i][(j - j_min) as usize]).collect();
            out.push((evolved, reference));
        }
        Ok(out)
    })?;
    let quoted = if k == 1 { 0.02 } else { 0.025 };
    let mut reports = Vec::new();
    for i in 0..k {
        for (n, &j) in js.iter().enumerate() {
            let a: Vec<f64> = pairs.iter().map(|p| p[i].0[n]).collect();
            let b: Vec<f64> = pairs.iter().map(|p| p[i].1[n]).collect();
            reports.push(KsReport::two_sample(format!("R{}({j}) after h={h}", i + 1), &a, &b, quoted)?);
        }
    }
    Ok(reports)
}
