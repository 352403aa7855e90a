//! Random environments: weight laws, coordinate-keyed sampling and materialized fields.

use std::collections::BTreeMap;

use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, tag, Stream};

pub const DEFAULT_CELL_BUDGET: u64 = 1 << 26;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    Exponential,
    Geometric,
    LogGamma,
}

/// Where the boundary parameter enters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    /// Cells `(i,i)` use `α+γ_i` (or `αγ_i` for geometric).
    Diagonal,
    /// Cells `(c,j)` of one column use `α+γ_c`; used for the full-space boundary-column model.
    Column(i64),
}

/// Inclusive integer rectangle `[i_min, i_max] × [j_min, j_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub i_min: i64,
    pub i_max: i64,
    pub j_min: i64,
    pub j_max: i64,
}

impl Window {
    pub fn new(i_min: i64, i_max: i64, j_min: i64, j_max: i64) -> Self {
        Window { i_min, i_max, j_min, j_max }
    }

    /// `[1,n] × [1,m]`.
    pub fn rect(n: i64, m: i64) -> Self {
        Window::new(1, n, 1, m)
    }

    pub fn width(&self) -> i64 {
        (self.i_max - self.i_min + 1).max(0)
    }

    pub fn height(&self) -> i64 {
        (self.j_max - self.j_min + 1).max(0)
    }

    pub fn cells(&self) -> u64 {
        self.width() as u64 * self.height() as u64
    }

    pub fn contains(&self, i: i64, j: i64) -> bool {
        i >= self.i_min && i <= self.i_max && j >= self.j_min && j <= self.j_max
    }
}

/// A fully specified weight law on ℤ².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvironmentSpec {
    pub kind: Kind,
    pub alpha: f64,
    /// Default line parameter used for every index absent from `gamma`.
    pub theta: f64,
    #[serde(default)]
    pub gamma: BTreeMap<i64, f64>,
    #[serde(default = "yes")]
    pub symmetric: bool,
    #[serde(default = "diagonal")]
    pub layout: Layout,
    #[serde(default)]
    pub window: Option<Window>,
}

fn yes() -> bool {
    true
}

fn diagonal() -> Layout {
    Layout::Diagonal
}

/// Law of a single cell after resolving degenerate parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Law {
    Exp(f64),
    Geo(f64),
    InvGamma(f64),
    /// Degenerate weight, either `0` or `+∞`.
    Const(f64),
}

impl EnvironmentSpec {
    pub fn new(kind: Kind, alpha: f64, theta: f64) -> Self {
        EnvironmentSpec {
            kind,
            alpha,
            theta,
            gamma: BTreeMap::new(),
            symmetric: true,
            layout: Layout::Diagonal,
            window: None,
        }
    }

    /// Half-space exponential LPP with diagonal `Exp(alpha)` and bulk `Exp(1)`.
    pub fn half_space_exponential(alpha: f64) -> Self {
        EnvironmentSpec::new(Kind::Exponential, alpha - 0.5, 0.5)
    }

    /// Half-space log-gamma weights: diagonal `Gamma⁻¹(alpha)`, bulk `Gamma⁻¹(beta)`.
    pub fn half_space_log_gamma(alpha: f64, beta: f64) -> Self {
        EnvironmentSpec::new(Kind::LogGamma, alpha - beta / 2.0, beta / 2.0)
    }

    /// Full-space field with column 1 `Exp(alpha)` and all other cells `Exp(1)`.
    pub fn column_exponential(alpha: f64) -> Self {
        EnvironmentSpec {
            symmetric: false,
            layout: Layout::Column(1),
            ..EnvironmentSpec::new(Kind::Exponential, alpha - 0.5, 0.5)
        }
    }

    /// Full-space field with column 1 `Gamma⁻¹(alpha)` and all other cells `Gamma⁻¹(beta)`.
    pub fn column_log_gamma(alpha: f64, beta: f64) -> Self {
        EnvironmentSpec {
            symmetric: false,
            layout: Layout::Column(1),
            ..EnvironmentSpec::new(Kind::LogGamma, alpha - beta / 2.0, beta / 2.0)
        }
    }

    pub fn with_gamma(mut self, i: i64, value: f64) -> Self {
        self.gamma.insert(i, value);
        self
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = Some(window);
        self
    }

    pub fn with_symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    pub fn gamma_at(&self, i: i64) -> f64 {
        if self.gamma.is_empty() {
            self.theta
        } else {
            *self.gamma.get(&i).unwrap_or(&self.theta)
        }
    }

    fn is_boundary(&self, i: i64, j: i64) -> bool {
        match self.layout {
            Layout::Diagonal => i == j,
            Layout::Column(c) => i == c,
        }
    }

    /// The raw law parameter at `(i,j)` before degeneracy is resolved.
    pub fn parameter(&self, i: i64, j: i64) -> f64 {
        let gi = self.gamma_at(i);
        let boundary = self.is_boundary(i, j);
        match (self.kind, boundary) {
            (Kind::Geometric, true) => self.alpha * gi,
            (Kind::Geometric, false) => gi * self.gamma_at(j),
            (_, true) => self.alpha + gi,
            (_, false) => gi + self.gamma_at(j),
        }
    }

    pub fn law(&self, i: i64, j: i64) -> Result<Law> {
        resolve(self.kind, self.parameter(i, j))
            .map_err(|e| Error::Parameter(format!("cell ({i},{j}): {e}")))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |x: f64| x.is_nan();
        if bad(self.alpha) || bad(self.theta) || self.gamma.values().any(|g| bad(*g)) {
            return Err(Error::Parameter("NaN parameter".into()));
        }
        if self.kind == Kind::Geometric
            && (self.alpha < 0.0 || self.theta < 0.0 || self.gamma.values().any(|g| *g < 0.0))
        {
            return Err(Error::Parameter("geometric parameters must be nonnegative".into()));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: EnvironmentSpec =
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }
}

fn resolve(kind: Kind, p: f64) -> std::result::Result<Law, String> {
    if p.is_nan() {
        return Err("NaN parameter".into());
    }
    Ok(match kind {
        Kind::Exponential | Kind::LogGamma => {
            if p == f64::INFINITY {
                Law::Const(0.0)
            } else if p <= 0.0 {
                Law::Const(f64::INFINITY)
            } else if kind == Kind::Exponential {
                Law::Exp(p)
            } else {
                Law::InvGamma(p)
            }
        }
        Kind::Geometric => {
            if p < 0.0 {
                return Err(format!("geometric parameter {p} is negative"));
            } else if p == 0.0 {
                Law::Const(0.0)
            } else if p >= 1.0 {
                Law::Const(f64::INFINITY)
            } else {
                Law::Geo(p)
            }
        }
    })
}

/// Replica identity: the pair `(master_seed, stream_id)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeededSource {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeededSource {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        SeededSource { master_seed, stream_id }
    }

    pub fn key(&self, parts: &[u64]) -> u64 {
        let mut all = Vec::with_capacity(parts.len() + 2);
        all.push(self.master_seed);
        all.push(self.stream_id);
        all.extend_from_slice(parts);
        rng::key(&all)
    }

    pub fn stream(&self, parts: &[u64]) -> Stream {
        Stream::new(self.key(parts))
    }

    /// Same stream under an independent seed, for the other side of a comparison.
    pub fn side(&self, label: u64) -> SeededSource {
        SeededSource::new(rng::subseed(self.master_seed, label), self.stream_id)
    }
}

fn weight_prefix(source: &SeededSource) -> u64 {
    rng::key(&[source.master_seed, source.stream_id, tag::WEIGHT])
}

#[inline]
fn cell_key(prefix: u64, symmetric: bool, i: i64, j: i64) -> u64 {
    let (a, b) = if symmetric && j < i { (j, i) } else { (i, j) };
    rng::mix64(rng::mix64(prefix ^ (a as u64).wrapping_mul(0xd6e8_feb8_6659_fd93)) ^ b as u64)
}

#[inline]
pub fn draw(law: Law, key: u64) -> f64 {
    match law {
        Law::Const(c) => c,
        Law::Exp(rate) => rng::exp_from_unit(rng::unit(rng::mix64(key)), rate),
        Law::Geo(p) => (rng::unit(rng::mix64(key)).ln() / p.ln()).floor(),
        Law::InvGamma(shape) => {
            let g: f64 = Gamma::new(shape, 1.0)
                .expect("positive shape")
                .sample(&mut Stream::new(key));
            if g > 0.0 {
                1.0 / g
            } else {
                f64::INFINITY
            }
        }
    }
}

/// The weight at `(i,j)`: a pure function of the spec, the source and the coordinates.
pub fn sample_weight(spec: &EnvironmentSpec, source: &SeededSource, i: i64, j: i64) -> Result<f64> {
    if let Some(w) = spec.window {
        if !w.contains(i, j) {
            return Err(Error::Range(format!("({i},{j}) outside window {w:?}")));
        }
    }
    let law = spec.law(i, j)?;
    Ok(draw(law, cell_key(weight_prefix(source), spec.symmetric, i, j)))
}

/// Anything that can report a weight at a lattice cell.
pub trait Weights {
    fn weight(&self, i: i64, j: i64) -> f64;

    /// Cells outside this window are not available; `None` means unbounded.
    fn window(&self) -> Option<Window> {
        None
    }
}

/// An unmaterialized field that samples on demand. Used by the large-lattice kernels.
#[derive(Debug, Clone)]
pub struct LazyField {
    spec: EnvironmentSpec,
    source: SeededSource,
    prefix: u64,
    boundary: Option<(i64, i64)>,
}

impl LazyField {
    pub fn new(spec: EnvironmentSpec, source: SeededSource) -> Result<Self> {
        spec.validate()?;
        let boundary = match (spec.gamma.keys().next(), spec.gamma.keys().next_back()) {
            (Some(a), Some(b)) => Some((*a, *b)),
            _ => None,
        };
        Ok(LazyField { spec, source, prefix: weight_prefix(&source), boundary })
    }

    pub fn spec(&self) -> &EnvironmentSpec {
        &self.spec
    }

    pub fn source(&self) -> SeededSource {
        self.source
    }
}

impl Weights for LazyField {
    #[inline]
    fn weight(&self, i: i64, j: i64) -> f64 {
        let spec = &self.spec;
        let homogeneous = match self.boundary {
            None => true,
            Some((lo, hi)) => (i < lo || i > hi) && (j < lo || j > hi),
        };
        let p = if homogeneous {
            let boundary = match spec.layout {
                Layout::Diagonal => i == j,
                Layout::Column(c) => i == c,
            };
            match (spec.kind, boundary) {
                (Kind::Geometric, true) => spec.alpha * spec.theta,
                (Kind::Geometric, false) => spec.theta * spec.theta,
                (_, true) => spec.alpha + spec.theta,
                (_, false) => 2.0 * spec.theta,
            }
        } else {
            spec.parameter(i, j)
        };
        let law = resolve(spec.kind, p).expect("validated spec");
        draw(law, cell_key(self.prefix, spec.symmetric, i, j))
    }

    fn window(&self) -> Option<Window> {
        self.spec.window
    }
}

/// A dense array of weights over a window.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightField {
    pub spec: EnvironmentSpec,
    pub source: SeededSource,
    window: Window,
    values: Vec<f64>,
}

impl WeightField {
    fn index(&self, i: i64, j: i64) -> usize {
        ((j - self.window.j_min) * self.window.width() + (i - self.window.i_min)) as usize
    }

    /// A deterministic field built from a function, for fixtures.
    pub fn from_fn(window: Window, symmetric: bool, f: impl Fn(i64, i64) -> f64) -> Self {
        let mut spec = EnvironmentSpec::new(Kind::Exponential, 0.0, 0.5).with_window(window);
        spec.symmetric = symmetric;
        let mut values = Vec::with_capacity(window.cells() as usize);
        for j in window.j_min..=window.j_max {
            for i in window.i_min..=window.i_max {
                let (a, b) = if symmetric && j < i { (j, i) } else { (i, j) };
                values.push(f(a, b));
            }
        }
        WeightField { spec, source: SeededSource::new(0, 0), window, values }
    }

    pub fn constant(window: Window, value: f64) -> Self {
        WeightField::from_fn(window, true, |_, _| value)
    }

    /// Row-major fixture: `rows[j-1][i-1]` is the weight at `(i,j)`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let m = rows.len() as i64;
        let n = rows.first().map_or(0, |r| r.len()) as i64;
        WeightField::from_fn(Window::rect(n, m), false, |i, j| {
            rows[(j - 1) as usize][(i - 1) as usize]
        })
    }

    pub fn window_rect(&self) -> Window {
        self.window
    }

    pub fn get(&self, i: i64, j: i64) -> Option<f64> {
        if self.window.contains(i, j) {
            Some(self.values[self.index(i, j)])
        } else {
            None
        }
    }

    /// Copy with the listed cells replaced; the mirror cell follows when the field is symmetric.
    pub fn override_cells(&self, cells: &[((i64, i64), f64)]) -> Result<WeightField> {
        let mut out = self.clone();
        for &((i, j), v) in cells {
            if !self.window.contains(i, j) {
                return Err(Error::Range(format!("({i},{j}) outside window")));
            }
            if v < 0.0 || v.is_nan() {
                return Err(Error::Domain(format!("weight {v} at ({i},{j}) must be nonnegative")));
            }
            let k = out.index(i, j);
            out.values[k] = v;
            if self.spec.symmetric && self.window.contains(j, i) {
                let k = out.index(j, i);
                out.values[k] = v;
            }
        }
        Ok(out)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

impl Weights for WeightField {
    #[inline]
    fn weight(&self, i: i64, j: i64) -> f64 {
        self.values[self.index(i, j)]
    }

    fn window(&self) -> Option<Window> {
        Some(self.window)
    }
}

pub fn materialize(spec: &EnvironmentSpec, source: &SeededSource) -> Result<WeightField> {
    materialize_with_budget(spec, source, DEFAULT_CELL_BUDGET)
}

pub fn materialize_with_budget(
    spec: &EnvironmentSpec,
    source: &SeededSource,
    budget: u64,
) -> Result<WeightField> {
    let window = spec
        .window
        .ok_or_else(|| Error::Domain("materialize needs a finite window".into()))?;
    if window.cells() > budget {
        return Err(Error::Capacity { cells: window.cells(), budget });
    }
    let lazy = LazyField::new(spec.clone(), *source)?;
    for j in window.j_min..=window.j_max {
        for i in window.i_min..=window.i_max {
            spec.law(i, j)?;
        }
    }
    let mut values = Vec::with_capacity(window.cells() as usize);
    for j in window.j_min..=window.j_max {
        for i in window.i_min..=window.i_max {
            values.push(lazy.weight(i, j));
        }
    }
    Ok(WeightField { spec: spec.clone(), source: *source, window, values })
}
