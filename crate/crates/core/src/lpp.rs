//! Last-passage percolation by dynamic programming.
//!
//! All kernels share one row-by-row recurrence over a rectangle, parameterized by the
//! algebra (max-plus for passage times, log-sum-exp for partition functions) and by the
//! path constraint. Weights of `+∞` propagate: `∞ + x = ∞`, `max(∞, x) = ∞`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::env::{Weights, Window};
use crate::error::{domain, Error, Result};

pub type Point = (i64, i64);

pub const NEG: f64 = f64::NEG_INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    None,
    /// A path containing `(i,i)` may not contain `(i-1,i)`.
    DiagonalCondition,
    /// Paths stay in `{i ≥ j}`.
    HalfSpace,
    /// Paths must visit a cell `(i, i+k)`.
    HitShiftedDiagonal(i64),
    /// Paths stay in `{(x-t, x+t) : |t| ≤ ℓ n^{2/3}/2, 1 ≤ x ≤ n}`.
    Parallelogram { n: i64, ell: f64 },
}

impl Constraint {
    #[inline]
    fn allows(&self, i: i64, j: i64) -> bool {
        match *self {
            Constraint::HalfSpace => i >= j,
            Constraint::Parallelogram { n, ell } => {
                let half = ell * (n as f64).powf(2.0 / 3.0);
                ((j - i) as f64).abs() <= half && i + j >= 2 && i + j <= 2 * n
            }
            _ => true,
        }
    }

    /// Whether the horizontal step `(i-1,j) → (i,j)` is forbidden.
    #[inline]
    fn blocks_left(&self, i: i64, j: i64) -> bool {
        matches!(self, Constraint::DiagonalCondition) && i == j
    }

    fn shift(&self) -> Option<i64> {
        match *self {
            Constraint::HitShiftedDiagonal(k) => Some(k),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algebra {
    MaxPlus,
    LogSum,
}

#[inline]
pub fn logaddexp(a: f64, b: f64) -> f64 {
    if a == NEG {
        return b;
    }
    if b == NEG {
        return a;
    }
    if a == f64::INFINITY || b == f64::INFINITY {
        return f64::INFINITY;
    }
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

impl Algebra {
    #[inline]
    pub fn add(self, a: f64, b: f64) -> f64 {
        match self {
            Algebra::MaxPlus => a.max(b),
            Algebra::LogSum => logaddexp(a, b),
        }
    }

    #[inline]
    fn lift(self, w: f64) -> f64 {
        match self {
            Algebra::MaxPlus => w,
            Algebra::LogSum => w.ln(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageQuery {
    pub start: Point,
    pub end: Point,
    pub constraint: Constraint,
    pub include_start_weight: bool,
}

impl PassageQuery {
    pub fn new(start: Point, end: Point) -> Self {
        PassageQuery { start, end, constraint: Constraint::None, include_start_weight: true }
    }

    pub fn with(mut self, constraint: Constraint) -> Self {
        self.constraint = constraint;
        self
    }

    /// The `X⁻` convention: the start vertex does not contribute.
    pub fn exclude_start(mut self) -> Self {
        self.include_start_weight = false;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PassageResult {
    pub value: f64,
    pub geodesic: Option<Vec<Point>>,
    pub argmax_index: Option<i64>,
    pub unique: bool,
}

impl PassageResult {
    fn value(value: f64) -> Self {
        PassageResult { value, geodesic: None, argmax_index: None, unique: true }
    }
}

/// Tie-breaking rule for geodesic backtracking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TieBreak {
    /// Prefer the predecessor `(i-1, j)`.
    #[default]
    Left,
    /// Prefer the predecessor `(i, j-1)`.
    Down,
}

/// A path origin inside a DP rectangle.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Source {
    pub at: Point,
    pub init: f64,
    pub with_weight: bool,
}

/// DP table over `[origin.0, corner.0] × [origin.1, corner.1]`.
pub(crate) struct Grid {
    pub origin: Point,
    pub ni: usize,
    pub nj: usize,
    pub any: Vec<f64>,
    pub hit: Option<Vec<f64>>,
    pub constraint: Constraint,
}

impl Grid {
    fn idx(&self, p: Point) -> Option<usize> {
        let di = p.0 - self.origin.0;
        let dj = p.1 - self.origin.1;
        if di < 0 || dj < 0 || di >= self.ni as i64 || dj >= self.nj as i64 {
            None
        } else {
            Some(dj as usize * self.ni + di as usize)
        }
    }

    /// Value at `p` under the grid's constraint.
    pub fn at(&self, p: Point) -> f64 {
        match self.idx(p) {
            None => NEG,
            Some(k) => match &self.hit {
                Some(h) => h[k],
                None => self.any[k],
            },
        }
    }
}

fn check_window<W: Weights + ?Sized>(w: &W, lo: Point, hi: Point) -> Result<()> {
    if let Some(win) = w.window() {
        if !win.contains(lo.0, lo.1) || !win.contains(hi.0, hi.1) {
            return Err(Error::Range(format!(
                "rectangle {lo:?}..{hi:?} not inside window {win:?}"
            )));
        }
    }
    Ok(())
}

#[inline]
fn lifted<W: Weights + ?Sized>(w: &W, alg: Algebra, i: i64, j: i64) -> Result<f64> {
    let x = w.weight(i, j);
    if alg == Algebra::LogSum && x <= 0.0 {
        return domain(format!("nonpositive weight {x} at ({i},{j}) in a partition function"));
    }
    Ok(alg.lift(x))
}

/// Fill the DP table. `sources` seed paths; every other cell is reached only from its
/// left and lower neighbours inside the rectangle.
pub(crate) fn run_grid<W: Weights + ?Sized>(
    w: &W,
    alg: Algebra,
    origin: Point,
    corner: Point,
    constraint: Constraint,
    sources: &[Source],
) -> Result<Grid> {
    if corner.0 < origin.0 || corner.1 < origin.1 {
        return Ok(Grid {
            origin,
            ni: 0,
            nj: 0,
            any: Vec::new(),
            hit: None,
            constraint,
        });
    }
    check_window(w, origin, corner)?;
    let ni = (corner.0 - origin.0 + 1) as usize;
    let nj = (corner.1 - origin.1 + 1) as usize;
    let mut init: BTreeMap<usize, (f64, bool)> = BTreeMap::new();
    for s in sources {
        let di = s.at.0 - origin.0;
        let dj = s.at.1 - origin.1;
        if di < 0 || dj < 0 || di >= ni as i64 || dj >= nj as i64 {
            continue;
        }
        let k = dj as usize * ni + di as usize;
        let e = init.entry(k).or_insert((NEG, s.with_weight));
        e.0 = alg.add(e.0, s.init);
    }
    let shift = constraint.shift();
    let mut any = vec![NEG; ni * nj];
    let mut hit = shift.map(|_| vec![NEG; ni * nj]);
    for dj in 0..nj {
        let j = origin.1 + dj as i64;
        for di in 0..ni {
            let i = origin.0 + di as i64;
            let k = dj * ni + di;
            if !constraint.allows(i, j) {
                continue;
            }
            let left_ok = di > 0 && !constraint.blocks_left(i, j);
            let mut pred = NEG;
            if left_ok {
                pred = any[k - 1];
            }
            if dj > 0 {
                pred = alg.add(pred, any[k - ni]);
            }
            let src = init.get(&k).copied();
            let mut weighted_pred = pred;
            if let Some((v, true)) = src {
                weighted_pred = alg.add(weighted_pred, v);
            }
            let mut val = NEG;
            let needs_weight = weighted_pred != NEG;
            let wt = if needs_weight { lifted(w, alg, i, j)? } else { 0.0 };
            if needs_weight {
                val = weighted_pred + wt;
            }
            if let Some((v, false)) = src {
                val = alg.add(val, v);
            }
            any[k] = val;
            if let (Some(h), Some(s)) = (hit.as_mut(), shift) {
                if j == i + s {
                    h[k] = val;
                } else {
                    let mut hp = NEG;
                    if left_ok {
                        hp = h[k - 1];
                    }
                    if dj > 0 {
                        hp = alg.add(hp, h[k - ni]);
                    }
                    h[k] = if hp == NEG { NEG } else { hp + lifted(w, alg, i, j)? };
                }
            }
        }
    }
    Ok(Grid { origin, ni, nj, any, hit, constraint })
}

/// Single-start rectangle DP.
pub(crate) fn point_grid<W: Weights + ?Sized>(
    w: &W,
    alg: Algebra,
    start: Point,
    corner: Point,
    constraint: Constraint,
    include_start: bool,
) -> Result<Grid> {
    let src = Source { at: start, init: 0.0, with_weight: include_start };
    run_grid(w, alg, start, corner, constraint, &[src])
}

/// Value of a point-to-point query in either algebra, `-∞` when `start ≰ end`.
pub(crate) fn query_value<W: Weights + ?Sized>(w: &W, alg: Algebra, q: &PassageQuery) -> Result<f64> {
    if q.start.0 > q.end.0 || q.start.1 > q.end.1 {
        return Ok(NEG);
    }
    Ok(point_grid(w, alg, q.start, q.end, q.constraint, q.include_start_weight)?.at(q.end))
}

/// Row-by-row max-plus DP over `[start.0, end.0] × [start.1, end.1]`, handing each
/// finished row to `on_row`. Only constraints without a hit layer.
fn stream_rows<W: Weights + ?Sized>(
    w: &W,
    start: Point,
    end: Point,
    constraint: Constraint,
    mut on_row: impl FnMut(i64, &[f64]),
) -> Result<()> {
    check_window(w, start, end)?;
    let ni = (end.0 - start.0 + 1) as usize;
    let mut row = vec![NEG; ni];
    for j in start.1..=end.1 {
        let mut left = NEG;
        for di in 0..ni {
            let i = start.0 + di as i64;
            if !constraint.allows(i, j) {
                row[di] = NEG;
                left = NEG;
                continue;
            }
            let mut pred = row[di];
            if di > 0 && !constraint.blocks_left(i, j) {
                pred = pred.max(left);
            }
            if (i, j) == start {
                pred = 0.0;
            }
            let v = if pred == NEG { NEG } else { pred + w.weight(i, j) };
            row[di] = v;
            left = v;
        }
        on_row(j, &row);
    }
    Ok(())
}

/// Memory-light passage time from `start` to `end` keeping one row at a time.
///
/// Equivalent to [`passage_time`] for the constraints without a hit layer.
pub fn passage_value_streaming<W: Weights + ?Sized>(
    w: &W,
    start: Point,
    end: Point,
    constraint: Constraint,
) -> Result<f64> {
    if constraint.shift().is_some() {
        return Ok(passage_time(w, &PassageQuery::new(start, end).with(constraint))?.value);
    }
    if start.0 > end.0 || start.1 > end.1 {
        return Ok(NEG);
    }
    let mut last = NEG;
    stream_rows(w, start, end, constraint, |_, row| last = row[row.len() - 1])?;
    Ok(last)
}

/// `X(start; (i, j))` for `i = start.0..=i_max`.
pub fn row_values<W: Weights + ?Sized>(w: &W, start: Point, i_max: i64, j: i64, constraint: Constraint) -> Result<Vec<f64>> {
    if constraint.shift().is_some() {
        return domain("row values are not available under a hit constraint");
    }
    if i_max < start.0 || j < start.1 {
        return domain("row lies below or left of the start");
    }
    let mut out = Vec::new();
    stream_rows(w, start, (i_max, j), constraint, |r, row| {
        if r == j {
            out = row.to_vec();
        }
    })?;
    Ok(out)
}

/// `X(start; (start.0 + k, start.1 + k))` for `k = 0..=m - start.0`.
pub fn diagonal_values<W: Weights + ?Sized>(w: &W, start: Point, m: i64, constraint: Constraint) -> Result<Vec<f64>> {
    if constraint.shift().is_some() {
        return domain("diagonal values are not available under a hit constraint");
    }
    if m < start.0 {
        return domain("diagonal ends before the start");
    }
    let end = (m, start.1 + m - start.0);
    let mut out = Vec::new();
    stream_rows(w, start, end, constraint, |r, row| out.push(row[(r - start.1) as usize]))?;
    Ok(out)
}

/// `X(u;v)`: maximum over admissible up-right paths of the weight sum.
pub fn passage_time<W: Weights + ?Sized>(w: &W, q: &PassageQuery) -> Result<PassageResult> {
    Ok(PassageResult::value(query_value(w, Algebra::MaxPlus, q)?))
}

/// Passage time together with the backtracked geodesic.
pub fn passage_with_geodesic<W: Weights + ?Sized>(
    w: &W,
    q: &PassageQuery,
    tie: TieBreak,
) -> Result<PassageResult> {
    if q.start.0 > q.end.0 || q.start.1 > q.end.1 {
        return Err(Error::NoPath);
    }
    let grid = point_grid(w, Algebra::MaxPlus, q.start, q.end, q.constraint, q.include_start_weight)?;
    let value = grid.at(q.end);
    if value == NEG {
        return Err(Error::NoPath);
    }
    let (path, margin) = backtrack(&grid, q.start, q.end, tie);
    let tol = 1e-12 * value.abs().max(1.0);
    Ok(PassageResult { value, geodesic: Some(path), argmax_index: None, unique: margin > tol })
}

pub fn extract_geodesic<W: Weights + ?Sized>(w: &W, q: &PassageQuery) -> Result<Vec<Point>> {
    extract_geodesic_with(w, q, TieBreak::Left)
}

pub fn extract_geodesic_with<W: Weights + ?Sized>(
    w: &W,
    q: &PassageQuery,
    tie: TieBreak,
) -> Result<Vec<Point>> {
    Ok(passage_with_geodesic(w, q, tie)?.geodesic.expect("geodesic present"))
}

/// Walk predecessors from `end` back to `start`; returns the path and the smallest
/// margin between competing predecessors (`+∞` if never contested).
fn backtrack(grid: &Grid, start: Point, end: Point, tie: TieBreak) -> (Vec<Point>, f64) {
    let shift = grid.constraint.shift();
    let mut in_hit = shift.is_some();
    let mut p = end;
    let mut path = vec![p];
    let mut margin = f64::INFINITY;
    while p != start {
        let (i, j) = p;
        if let Some(s) = shift {
            if in_hit && j == i + s {
                in_hit = false;
            }
        }
        let layer = |q: Point| -> f64 {
            match grid.idx(q) {
                None => NEG,
                Some(k) => {
                    if in_hit {
                        grid.hit.as_ref().expect("hit layer")[k]
                    } else {
                        grid.any[k]
                    }
                }
            }
        };
        let left = if grid.constraint.blocks_left(i, j) { NEG } else { layer((i - 1, j)) };
        let down = layer((i, j - 1));
        if left != NEG && down != NEG {
            margin = margin.min((left - down).abs());
        }
        let go_left = match tie {
            TieBreak::Left => left >= down,
            TieBreak::Down => left > down,
        };
        p = if go_left && left != NEG { (i - 1, j) } else { (i, j - 1) };
        path.push(p);
    }
    path.reverse();
    (path, margin)
}

/// Point-to-line value over the endpoints `(n+i, m-i)`, `0 ≤ i < m`, in the half-space.
pub fn point_to_line_trapezoid<W: Weights + ?Sized>(w: &W, n: i64, m: i64) -> Result<PassageResult> {
    point_to_line_trapezoid_with(w, n, m, Constraint::HalfSpace)
}

pub fn point_to_line_trapezoid_with<W: Weights + ?Sized>(
    w: &W,
    n: i64,
    m: i64,
    constraint: Constraint,
) -> Result<PassageResult> {
    let (values, _) = trapezoid_values(w, Algebra::MaxPlus, n, m, constraint)?;
    let mut best = NEG;
    let mut arg = 0;
    for (i, v) in values.iter().enumerate() {
        if *v > best {
            best = *v;
            arg = i as i64;
        }
    }
    let mut sorted = values.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let unique = sorted.len() < 2 || sorted[0] - sorted[1] > 1e-12 * best.abs().max(1.0);
    Ok(PassageResult { value: best, geodesic: None, argmax_index: Some(arg), unique })
}

/// Point values at the trapezoid endpoints, `i = 0..m`.
pub(crate) fn trapezoid_values<W: Weights + ?Sized>(
    w: &W,
    alg: Algebra,
    n: i64,
    m: i64,
    constraint: Constraint,
) -> Result<(Vec<f64>, Grid)> {
    if m < 1 || n < m {
        return domain(format!("trapezoid needs n ≥ m ≥ 1, got n={n}, m={m}"));
    }
    let grid = point_grid(w, alg, (1, 1), (n + m - 1, m), constraint, true)?;
    let values = (0..m).map(|i| grid.at((n + i, m - i))).collect();
    Ok((values, grid))
}

/// `[j,t]_L`: `(t+j, t)` for `j ≥ 0`, `(t, t-j)` for `j < 0`.
pub fn l_point(j: i64, t: i64) -> Point {
    if j >= 0 {
        (t + j, t)
    } else {
        (t, t - j)
    }
}

/// A boundary profile `f: ℤ → ℝ` known on a finite range, optionally with linear tails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFunction {
    pub j_min: i64,
    pub values: Vec<f64>,
    #[serde(default)]
    pub left_slope: Option<f64>,
    #[serde(default)]
    pub right_slope: Option<f64>,
}

impl BoundaryFunction {
    pub fn new(j_min: i64, values: Vec<f64>) -> Self {
        BoundaryFunction { j_min, values, left_slope: None, right_slope: None }
    }

    pub fn from_fn(j_min: i64, j_max: i64, f: impl Fn(i64) -> f64) -> Self {
        BoundaryFunction::new(j_min, (j_min..=j_max).map(f).collect())
    }

    pub fn zero(j_min: i64, j_max: i64) -> Self {
        BoundaryFunction::from_fn(j_min, j_max, |_| 0.0)
    }

    pub fn with_tails(mut self, left: Option<f64>, right: Option<f64>) -> Self {
        self.left_slope = left;
        self.right_slope = right;
        self
    }

    pub fn j_max(&self) -> i64 {
        self.j_min + self.values.len() as i64 - 1
    }

    pub fn eval(&self, j: i64) -> Option<f64> {
        if self.values.is_empty() {
            return None;
        }
        if j < self.j_min {
            self.left_slope.map(|s| self.values[0] - s * (self.j_min - j) as f64)
        } else if j > self.j_max() {
            self.right_slope.map(|s| self.values[self.values.len() - 1] + s * (j - self.j_max()) as f64)
        } else {
            Some(self.values[(j - self.j_min) as usize])
        }
    }

    /// Increment `f(j) - f(j - sgn j)` carried by the cell `[j,0]_L`.
    pub fn increment(&self, j: i64) -> Option<f64> {
        if j == 0 {
            return Some(0.0);
        }
        Some(self.eval(j)? - self.eval(j - j.signum())?)
    }

    pub fn shifted(&self, c: f64) -> Self {
        let mut g = self.clone();
        for v in &mut g.values {
            *v += c;
        }
        g
    }

    pub fn covers(&self, lo: i64, hi: i64) -> bool {
        self.eval(lo).is_some() && self.eval(hi).is_some()
    }
}

/// The environment `E^f`: increments of `f` on the level-0 L-shape, `base` elsewhere.
/// With `multiplicative`, the L-shape carries `exp` of the increment (ratio form).
pub(crate) struct Seeded<'a, W: ?Sized> {
    pub base: &'a W,
    pub f: &'a BoundaryFunction,
    pub multiplicative: bool,
}

impl<W: Weights + ?Sized> Weights for Seeded<'_, W> {
    #[inline]
    fn weight(&self, i: i64, j: i64) -> f64 {
        let inc = if j == 0 && i >= 0 {
            Some(self.f.increment(i).expect("covered"))
        } else if i == 0 && j > 0 {
            Some(self.f.increment(-j).expect("covered"))
        } else {
            None
        };
        match inc {
            Some(x) if self.multiplicative => x.exp(),
            Some(x) => x,
            None => self.base.weight(i, j),
        }
    }

    fn window(&self) -> Option<Window> {
        None
    }
}

/// DP from `(0,0)` over `E^f` to the L-shape at level `h`; returns values at `[j,h]_L`.
pub(crate) fn seeded_profile<W: Weights + ?Sized>(
    w: &W,
    f: &BoundaryFunction,
    h: i64,
    js: &[i64],
    alg: Algebra,
) -> Result<Vec<f64>> {
    if h < 1 {
        return domain(format!("target level {h} must be at least 1"));
    }
    let jp = js.iter().copied().max().unwrap_or(0).max(0);
    let jn = (-js.iter().copied().min().unwrap_or(0)).max(0);
    if !f.covers(-(h + jn), h + jp) {
        return domain(format!("boundary function must be finite on [{}, {}]", -(h + jn), h + jp));
    }
    let corner = (h + jp, h + jn);
    check_window(w, (1, 1), corner)?;
    let seeded = Seeded { base: w, f, multiplicative: alg == Algebra::LogSum };
    let src = Source { at: (0, 0), init: 0.0, with_weight: true };
    let grid = run_grid(&seeded, alg, (0, 0), corner, Constraint::DiagonalCondition, &[src])?;
    Ok(js.iter().map(|&j| grid.at(l_point(j, h))).collect())
}

/// `X^f(0,0; [j,h]_L)` in the symmetric field with the diagonal condition.
pub fn boundary_seeded_passage<W: Weights + ?Sized>(
    w: &W,
    f: &BoundaryFunction,
    target: (i64, i64),
) -> Result<PassageResult> {
    let (j, h) = target;
    let v = seeded_profile(w, f, h, &[j], Algebra::MaxPlus)?;
    Ok(PassageResult::value(v[0]))
}

/// `X^f(0,0; [j,h]_L)` for several `j` from one DP.
pub fn boundary_seeded_profile<W: Weights + ?Sized>(
    w: &W,
    f: &BoundaryFunction,
    h: i64,
    js: &[i64],
) -> Result<Vec<f64>> {
    seeded_profile(w, f, h, js, Algebra::MaxPlus)
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= 1e-10 * a.abs().max(b.abs()).max(1.0)
}

/// Checks `X(u;v) = max_z [X(u;(z,r)) + X((z,r+1);v)]` under the given constraint.
/// Values are compared up to floating-point reassociation (relative `1e-10`).
pub fn metric_composition_check_with<W: Weights + ?Sized>(
    w: &W,
    u: Point,
    v: Point,
    r: i64,
    constraint: Constraint,
) -> Result<bool> {
    if r < u.1 || r >= v.1 {
        return domain(format!("split row {r} must lie in [{}, {})", u.1, v.1));
    }
    if u.0 > v.0 {
        return domain("start must be left of end");
    }
    let direct = point_grid(w, Algebra::MaxPlus, u, v, constraint, true)?.at(v);
    let first = point_grid(w, Algebra::MaxPlus, u, (v.0, r), constraint, true)?;
    let mut best = NEG;
    for z in u.0..=v.0 {
        let a = first.at((z, r));
        if a == NEG {
            continue;
        }
        let b = point_grid(w, Algebra::MaxPlus, (z, r + 1), v, constraint, true)?.at(v);
        if b == NEG {
            continue;
        }
        best = best.max(a + b);
    }
    Ok(close(direct, best))
}

pub fn metric_composition_check<W: Weights + ?Sized>(w: &W, u: Point, v: Point, r: i64) -> Result<bool> {
    metric_composition_check_with(w, u, v, r, Constraint::None)
}

/// Path-crossing inequality `X(u₁;v₁) + X(u₂;v₂) ≥ X(u₁;v₂) + X(u₂;v₁)` with
/// `uᵢ = (xᵢ, s)`, `vᵢ = (yᵢ, t)`.
pub fn quadrangle_check_with<W: Weights + ?Sized>(
    w: &W,
    x: (i64, i64),
    y: (i64, i64),
    rows: (i64, i64),
    constraint: Constraint,
) -> Result<bool> {
    let ((x1, x2), (y1, y2), (s, t)) = (x, y, rows);
    if x1 > x2 || y1 > y2 || s > t {
        return domain("quadrangle needs x1 ≤ x2, y1 ≤ y2 and s ≤ t");
    }
    let g1 = point_grid(w, Algebra::MaxPlus, (x1, s), (y2, t), constraint, true)?;
    let g2 = point_grid(w, Algebra::MaxPlus, (x2, s), (y2, t), constraint, true)?;
    let lhs = g1.at((y1, t)) + g2.at((y2, t));
    let rhs = g1.at((y2, t)) + g2.at((y1, t));
    Ok(lhs >= rhs || close(lhs, rhs) || rhs == NEG)
}

pub fn quadrangle_check<W: Weights + ?Sized>(
    w: &W,
    x: (i64, i64),
    y: (i64, i64),
    rows: (i64, i64),
) -> Result<bool> {
    quadrangle_check_with(w, x, y, rows, Constraint::None)
}

/// Half-space field whose diagonal is divided by `a`, bulk unchanged.
struct DiagonalScaled<'a, W: ?Sized> {
    base: &'a W,
    a: f64,
}

impl<W: Weights + ?Sized> Weights for DiagonalScaled<'_, W> {
    fn weight(&self, i: i64, j: i64) -> f64 {
        let y = self.base.weight(i, j);
        if i == j {
            if self.a == f64::INFINITY {
                0.0
            } else {
                y / self.a
            }
        } else {
            y
        }
    }

    fn window(&self) -> Option<Window> {
        self.base.window()
    }
}

/// Two-environment inequality `X_β(u₁;v₁) + X_α(u₂;v₂) ≤ X_α(u₁;v₁) + X_β(u₂;v₂)`
/// for `α ≤ β`, where `X_a` has diagonal `Y(i,i)/a` and bulk `Y`, half-space paths.
pub fn coupled_quadrangle_check<W: Weights + ?Sized>(
    y: &W,
    alpha: f64,
    beta: f64,
    x: (i64, i64),
    ys: (i64, i64),
    rows: (i64, i64),
) -> Result<bool> {
    if !(alpha > 0.0 && alpha <= beta) {
        return domain(format!("need 0 < α ≤ β, got α={alpha}, β={beta}"));
    }
    let ((x1, x2), (y1, y2), (s, t)) = (x, ys, rows);
    if x1 > x2 || y1 > y2 || s > t {
        return domain("quadrangle needs x1 ≤ x2, y1 ≤ y2 and s ≤ t");
    }
    let xa = DiagonalScaled { base: y, a: alpha };
    let xb = DiagonalScaled { base: y, a: beta };
    let hs = Constraint::HalfSpace;
    let p = |w: &dyn Weights, u: Point, v: Point| query_value(w, Algebra::MaxPlus, &PassageQuery::new(u, v).with(hs));
    let lhs = p(&xb, (x1, s), (y1, t))? + p(&xa, (x2, s), (y2, t))?;
    let rhs = p(&xa, (x1, s), (y1, t))? + p(&xb, (x2, s), (y2, t))?;
    Ok(lhs <= rhs || close(lhs, rhs) || lhs == NEG)
}

/// Passage time from `(1,1)` to `(n,n)` inside the parallelogram `U_{n,ℓ}`.
pub fn constrained_parallelogram<W: Weights + ?Sized>(w: &W, n: i64, ell: f64) -> Result<PassageResult> {
    if n < 1 || !(ell > 0.0) {
        return domain(format!("parallelogram needs n ≥ 1 and ℓ > 0, got n={n}, ℓ={ell}"));
    }
    if ell * (n as f64).powf(2.0 / 3.0) < 2.0 - 1e-9 {
        return domain(format!("parallelogram needs ℓ n^(2/3) ≥ 2, got n={n}, ℓ={ell}"));
    }
    let q = PassageQuery::new((1, 1), (n, n)).with(Constraint::Parallelogram { n, ell });
    let v = query_value(w, Algebra::MaxPlus, &q)?;
    if v == NEG {
        return Err(Error::NoPath);
    }
    Ok(PassageResult::value(v))
}
