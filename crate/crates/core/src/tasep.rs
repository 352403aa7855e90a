//! Half-space TASEP as height-function dynamics driven by Poisson clocks, TASEP as an
//! inverse of half-space exponential LPP, and the `A_ε` rescaling.
//!
//! Clocks live on the cylinder graph `Λ_d`. With `d = 1` every site has one clock and
//! the dynamics is the basic coupling. For general `d`, site `i` flips when the clock at
//! `(i, h(i) mod 2d)` rings, `h(i)` being the height just before the ring.

use serde::{Deserialize, Serialize};

use crate::env::{SeededSource, Weights};
use crate::error::{domain, Error, Result};
use crate::lpp::{self, Algebra, Constraint, Source, NEG};
use crate::rng::tag;

/// A height profile on `[0, len)`, extended linearly to the right with its last slope.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightFunction {
    values: Vec<i64>,
}

impl HeightFunction {
    pub fn new(values: Vec<i64>) -> Result<Self> {
        if values.is_empty() {
            return domain("height function needs at least one site");
        }
        if values[0].rem_euclid(2) != 0 {
            return domain(format!("h(0)={} must be even", values[0]));
        }
        if values.windows(2).any(|w| (w[1] - w[0]).abs() != 1) {
            return domain("neighbouring heights must differ by ±1");
        }
        Ok(HeightFunction { values })
    }

    /// `δ_y(x) = |x - y| + 1{y odd}` on `[0, len)`.
    pub fn narrow_wedge(y: i64, len: usize) -> Self {
        let odd = y.rem_euclid(2);
        HeightFunction { values: (0..len as i64).map(|x| (x - y).abs() + odd).collect() }
    }

    /// `h(x) = x mod 2`.
    pub fn flat(len: usize) -> Self {
        HeightFunction { values: (0..len as i64).map(|x| x.rem_euclid(2)).collect() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[i64] {
        &self.values
    }

    pub fn right_slope(&self) -> i64 {
        match self.values.len() {
            1 => 1,
            n => self.values[n - 1] - self.values[n - 2],
        }
    }

    pub fn get(&self, x: usize) -> i64 {
        let n = self.values.len();
        if x < n {
            self.values[x]
        } else {
            self.values[n - 1] + self.right_slope() * (x + 1 - n) as i64
        }
    }

    /// The profile on `[0, len)`, using the extension where needed.
    pub fn resized(&self, len: usize) -> Self {
        HeightFunction { values: (0..len).map(|x| self.get(x)).collect() }
    }

    fn is_local_min(&self, i: usize) -> bool {
        let h = self.values[i];
        let right = self.values[i + 1] == h + 1;
        right && (i == 0 || self.values[i - 1] == h + 1)
    }
}

/// `x,h` rows for a list of `(t, profile)` snapshots: `t,x,h`.
pub fn trajectory_csv(snapshots: &[(f64, HeightFunction)]) -> String {
    let mut out = String::from("t,x,h\n");
    for (t, h) in snapshots {
        for (x, v) in h.values.iter().enumerate() {
            out.push_str(&format!("{t},{x},{v}\n"));
        }
    }
    out
}

/// Poisson clocks on `Λ_d × [0, T]` for sites `[0, sites)`: intensity `α` at site `0`, `1`
/// elsewhere. The vertex `(x, a)` with `a = 2b + (x mod 2)` has index `x·d + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClockField {
    pub d: usize,
    pub alpha: f64,
    pub horizon: f64,
    pub sites: usize,
    events: Vec<Vec<f64>>,
}

impl ClockField {
    fn check(d: usize, alpha: f64, sites: usize, horizon: f64) -> Result<()> {
        if d == 0 || sites < 2 {
            return domain(format!("need d ≥ 1 and at least two sites, got d={d}, sites={sites}"));
        }
        if !(alpha > 0.0 && alpha.is_finite() && horizon >= 0.0 && horizon.is_finite()) {
            return domain(format!("need α > 0 and a finite horizon, got α={alpha}, T={horizon}"));
        }
        Ok(())
    }

    pub fn empty(d: usize, alpha: f64, sites: usize, horizon: f64) -> Result<Self> {
        Self::check(d, alpha, sites, horizon)?;
        Ok(ClockField { d, alpha, horizon, sites, events: vec![Vec::new(); sites * d] })
    }

    /// Each vertex draws its own exponential gaps, so a vertex's clock does not depend on
    /// the size of the field.
    pub fn sample(d: usize, alpha: f64, sites: usize, horizon: f64, source: &SeededSource) -> Result<Self> {
        let mut field = Self::empty(d, alpha, sites, horizon)?;
        for x in 0..sites {
            let rate = if x == 0 { alpha } else { 1.0 };
            for b in 0..d {
                let mut s = source.stream(&[tag::CLOCK, x as u64, b as u64]);
                let list = &mut field.events[x * d + b];
                let mut t = s.exp(rate);
                while t <= horizon {
                    list.push(t);
                    t += s.exp(rate);
                }
            }
        }
        Ok(field)
    }

    /// A field with the listed `((x, a), time)` events.
    pub fn from_events(
        d: usize,
        alpha: f64,
        sites: usize,
        horizon: f64,
        events: &[((usize, usize), f64)],
    ) -> Result<Self> {
        let mut field = Self::empty(d, alpha, sites, horizon)?;
        for &((x, a), t) in events {
            let k = field
                .vertex_index(x, a)
                .ok_or_else(|| Error::Domain(format!("({x},{a}) is not a vertex of the field")))?;
            if !(t >= 0.0 && t <= horizon) {
                return domain(format!("event time {t} outside [0, {horizon}]"));
            }
            field.events[k].push(t);
        }
        for list in &mut field.events {
            list.sort_by(f64::total_cmp);
        }
        Ok(field)
    }

    pub fn levels(&self) -> usize {
        2 * self.d
    }

    pub fn vertex_index(&self, x: usize, a: usize) -> Option<usize> {
        if x >= self.sites || a >= 2 * self.d || (x + a) % 2 != 0 {
            None
        } else {
            Some(x * self.d + a / 2)
        }
    }

    pub fn events_at(&self, x: usize, a: usize) -> &[f64] {
        match self.vertex_index(x, a) {
            Some(k) => &self.events[k],
            None => &[],
        }
    }

    pub fn event_count(&self) -> usize {
        self.events.iter().map(Vec::len).sum()
    }

    /// All events with time in `(s, t]`, ordered by time, then site, then level.
    pub fn merged(&self, s: f64, t: f64) -> Vec<(f64, usize, usize)> {
        let mut all = Vec::new();
        for x in 0..self.sites {
            for b in 0..self.d {
                let a = 2 * b + x % 2;
                for &r in &self.events[x * self.d + b] {
                    if r > s && r <= t {
                        all.push((r, x, a));
                    }
                }
            }
        }
        all.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)).then(p.2.cmp(&q.2)));
        all
    }

    /// `(x, a, r) ↦ (x, -a mod 2d, T - r)`.
    pub fn time_reversed(&self) -> Self {
        let mut out = ClockField { events: vec![Vec::new(); self.events.len()], ..self.clone() };
        let m = 2 * self.d;
        for x in 0..self.sites {
            for b in 0..self.d {
                let a = 2 * b + x % 2;
                let ra = (m - a) % m;
                let k = out.vertex_index(x, ra).expect("parity is preserved");
                let mut list: Vec<f64> = self.events[x * self.d + b].iter().map(|r| self.horizon - r).collect();
                list.reverse();
                out.events[k] = list;
            }
        }
        out
    }
}

/// Sites whose value is still exact after the evolution, and the profile there.
fn run_dynamics(h0: &HeightFunction, clocks: &ClockField, t: f64) -> Result<(HeightFunction, usize)> {
    if !(t >= 0.0) || t > clocks.horizon {
        return domain(format!("time {t} outside the clock horizon [0, {}]", clocks.horizon));
    }
    let n = clocks.sites;
    let mut h = h0.resized(n);
    let m = clocks.levels() as i64;
    // sites ≥ exact may be wrong: their updates needed a height beyond the window
    let mut exact = n;
    for (_, i, a) in clocks.merged(0.0, t) {
        if i >= exact || h.values[i].rem_euclid(m) != a as i64 {
            continue;
        }
        if i + 1 >= exact {
            exact = i;
            continue;
        }
        if h.is_local_min(i) {
            h.values[i] += 2;
            debug_assert!(HeightFunction::new(h.values[..exact].to_vec()).is_ok());
        }
    }
    h.values.truncate(exact.max(1));
    Ok((h, exact))
}

/// `h_t` on the sites not reached by boundary effects from the right end of the window.
pub fn evolve_clocks(h0: &HeightFunction, clocks: &ClockField, t: f64) -> Result<HeightFunction> {
    Ok(run_dynamics(h0, clocks, t)?.0)
}

/// `h_t` on `[0, x_max]`, or a padding error if the window was too small.
pub fn evolve_observed(h0: &HeightFunction, clocks: &ClockField, t: f64, x_max: usize) -> Result<HeightFunction> {
    let (h, exact) = run_dynamics(h0, clocks, t)?;
    if exact <= x_max {
        return Err(Error::Padding(format!(
            "site {exact} was reached by the window edge; observed sites go up to {x_max}"
        )));
    }
    Ok(h.resized(x_max + 1))
}

/// Window size for observing `[0, x_max]` up to time `t`.
pub fn padded_sites(x_max: usize, alpha: f64, t: f64) -> usize {
    x_max + 1 + (4.0 * (1.0 + alpha) * t + 10.0 * t.sqrt()).ceil() as usize + 10
}

/// `R(x, y) = ((x+y)/2, (y-x)/2)`.
pub fn rotate(x: i64, y: i64) -> (i64, i64) {
    ((x + y).div_euclid(2), (y - x).div_euclid(2))
}

/// `max{g ≡ x (mod 2) : max_y X(R(y, h(y)+2); R(x, g)) ≤ t}` in the half-space field.
pub fn height_from_lpp<W: Weights + ?Sized>(field: &W, h: &HeightFunction, t: f64, x: usize) -> Result<i64> {
    if !(t >= 0.0) {
        return domain(format!("time {t} must be nonnegative"));
    }
    if h.right_slope() != 1 {
        return domain("the profile must end on an up-step so that only finitely many sources matter");
    }
    let base = h.get(x);
    let mut k_max = (t.ceil() as i64).max(1) + 2;
    loop {
        let target = rotate(x as i64, base + 2 * k_max);
        // beyond the window sources move right one column per site, so stop past the target
        let mut sources = Vec::new();
        let mut y = 0usize;
        loop {
            let s = rotate(y as i64, h.get(y) + 2);
            if y >= h.len() && s.0 > target.0 {
                break;
            }
            if s.0 <= target.0 && s.1 <= target.1 {
                sources.push(Source { at: s, init: 0.0, with_weight: true });
            }
            y += 1;
        }
        if sources.is_empty() {
            return Ok(base + 2 * k_max);
        }
        let origin = (
            sources.iter().map(|s| s.at.0).min().unwrap(),
            sources.iter().map(|s| s.at.1).min().unwrap(),
        );
        let grid = lpp::run_grid(field, Algebra::MaxPlus, origin, target, Constraint::HalfSpace, &sources)?;
        let mut best = 0;
        for k in 1..=k_max {
            let v = grid.at(rotate(x as i64, base + 2 * k));
            if v != NEG && v > t {
                return Ok(base + 2 * best);
            }
            best = k;
        }
        k_max *= 2;
    }
}

/// Boundary rate `α = 1/2 - ρ ε^{1/2} / 2`.
pub fn tasep_alpha(rho: f64, eps: f64) -> f64 {
    0.5 - rho * eps.sqrt() / 2.0
}

/// `A_ε h` on the grid `x_k = kε/2`: `values[k] = -ε^{1/2} h(k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledHeight {
    pub eps: f64,
    pub values: Vec<f64>,
}

impl RescaledHeight {
    /// Linear interpolation between grid points.
    pub fn eval(&self, x: f64) -> Option<f64> {
        if !(x >= 0.0) {
            return None;
        }
        let u = 2.0 * x / self.eps;
        let k = u.floor() as usize;
        if k + 1 >= self.values.len() {
            return if (u - (self.values.len() - 1) as f64).abs() < 1e-9 { self.values.last().copied() } else { None };
        }
        let w = u - k as f64;
        Some(self.values[k] * (1.0 - w) + self.values[k + 1] * w)
    }
}

pub fn rescale_height(h: &HeightFunction, eps: f64) -> Result<RescaledHeight> {
    if !(eps > 0.0) {
        return domain(format!("ε={eps} must be positive"));
    }
    let s = eps.sqrt();
    Ok(RescaledHeight { eps, values: h.values.iter().map(|&v| -s * v as f64).collect() })
}

/// `A_ε⁻¹` on grid values; the result must lie in SRW₊.
pub fn unrescale(f: &RescaledHeight) -> Result<HeightFunction> {
    let s = f.eps.sqrt();
    let mut values = Vec::with_capacity(f.values.len());
    for &v in &f.values {
        let h = -v / s;
        let r = h.round();
        if (h - r).abs() > 1e-6 {
            return domain(format!("value {v} is not in the range of A_ε"));
        }
        values.push(r as i64);
    }
    HeightFunction::new(values)
}

/// One sample of `A_ε(h_{2ε^{-3/2}t}) + t/ε` at `ys`, starting from `A_ε⁻¹ f0`.
pub fn rescaled_fixed_point_marginal(
    f0: &RescaledHeight,
    rho: f64,
    eps: f64,
    t: f64,
    ys: &[f64],
    source: &SeededSource,
) -> Result<Vec<f64>> {
    let alpha = tasep_alpha(rho, eps);
    if !(alpha > 0.0) {
        return domain(format!("boundary rate {alpha} must be positive"));
    }
    if (f0.eps - eps).abs() > 1e-15 * eps {
        return domain("initial data is on a different grid");
    }
    if ys.iter().any(|&y| !(y >= 0.0)) {
        return domain("evaluation points must be nonnegative");
    }
    let h0 = unrescale(f0)?;
    let time = 2.0 * eps.powf(-1.5) * t;
    let x_max = ys.iter().map(|&y| (2.0 * y / eps).ceil() as usize + 1).max().unwrap_or(0);
    let clocks = ClockField::sample(1, alpha, padded_sites(x_max, alpha, time), time, source)?;
    let h = evolve_observed(&h0, &clocks, time, x_max)?;
    let a = rescale_height(&h, eps)?;
    ys.iter()
        .map(|&y| a.eval(y).map(|v| v + t / eps).ok_or_else(|| Error::Range(format!("{y} outside the window"))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{WeightField, Window};

    #[test]
    fn srw_membership() {
        assert!(HeightFunction::new(vec![1, 2]).is_err());
        assert!(HeightFunction::new(vec![0, 2]).is_err());
        let w = HeightFunction::narrow_wedge(3, 6);
        assert_eq!(w.values(), &[4, 3, 2, 1, 2, 3]);
        assert_eq!(w.get(8), 6);
        assert!(HeightFunction::new(w.values().to_vec()).is_ok());
    }

    #[test]
    fn single_events() {
        let h0 = HeightFunction::narrow_wedge(2, 8);
        let none = ClockField::empty(1, 0.7, 8, 5.0).unwrap();
        assert_eq!(evolve_clocks(&h0, &none, 5.0).unwrap().values()[..6], h0.values()[..6]);
        let at_min = ClockField::from_events(1, 0.7, 8, 5.0, &[((2, 0), 1.0)]).unwrap();
        assert_eq!(evolve_observed(&h0, &at_min, 5.0, 4).unwrap().values(), &[2, 1, 2, 1, 2]);
        let off_min = ClockField::from_events(1, 0.7, 8, 5.0, &[((3, 1), 1.0)]).unwrap();
        assert_eq!(evolve_observed(&h0, &off_min, 5.0, 4).unwrap().values(), &[2, 1, 0, 1, 2]);
        // the boundary flips when h(1) = h(0) + 1
        let b = ClockField::from_events(1, 0.7, 8, 5.0, &[((0, 0), 0.5)]).unwrap();
        let flat = HeightFunction::flat(8);
        assert_eq!(evolve_observed(&flat, &b, 1.0, 2).unwrap().values(), &[2, 1, 0]);
    }

    #[test]
    fn padding_is_enforced() {
        let h0 = HeightFunction::flat(4);
        let c = ClockField::from_events(1, 1.0, 4, 3.0, &[((3, 1), 0.1), ((2, 0), 0.2), ((1, 1), 0.3)]).unwrap();
        assert!(matches!(evolve_observed(&h0, &c, 3.0, 1), Err(Error::Padding(_))));
        assert!(evolve_observed(&h0, &c, 3.0, 0).is_ok());
    }

    #[test]
    fn levels_select_the_clock() {
        // d = 2: the wedge minimum at site 2 has height 0, so only level a = 0 flips it
        let h0 = HeightFunction::narrow_wedge(2, 8);
        let wrong = ClockField::from_events(2, 1.0, 8, 1.0, &[((2, 2), 0.5)]).unwrap();
        assert_eq!(evolve_observed(&h0, &wrong, 1.0, 4).unwrap(), h0.resized(5));
        let right = ClockField::from_events(2, 1.0, 8, 1.0, &[((2, 0), 0.5)]).unwrap();
        assert_eq!(evolve_observed(&h0, &right, 1.0, 4).unwrap().values()[2], 2);
    }

    #[test]
    fn reversal_is_an_involution() {
        let c = ClockField::sample(3, 0.7, 10, 4.0, &SeededSource::new(2, 2)).unwrap();
        let r = c.time_reversed();
        assert_eq!(r.event_count(), c.event_count());
        let back = r.time_reversed();
        for (p, q) in back.events.iter().flatten().zip(c.events.iter().flatten()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn lpp_inverse_on_all_ones() {
        let field = WeightField::constant(Window::new(-50, 50, -50, 50), 1.0);
        let h = HeightFunction::narrow_wedge(0, 20);
        assert_eq!(height_from_lpp(&field, &h, 2.5, 0).unwrap(), 2);
        assert_eq!(height_from_lpp(&field, &h, 0.0, 3).unwrap(), 3);
        let mut last = i64::MIN;
        for t in [0.0, 1.0, 3.0, 6.5, 12.0] {
            let g = height_from_lpp(&field, &h, t, 2).unwrap();
            assert!(g >= last && (g - 2).rem_euclid(2) == 0);
            last = g;
        }
        assert!(height_from_lpp(&field, &h, -1.0, 0).is_err());
    }

    #[test]
    fn rescaling_round_trip() {
        let eps = 0.04;
        let h = HeightFunction::narrow_wedge(0, 12);
        let a = rescale_height(&h, eps).unwrap();
        for k in 0..12 {
            let x = k as f64 * eps / 2.0;
            assert!((a.eval(x).unwrap() - (-2.0 / eps.sqrt() * x)).abs() < 1e-12);
        }
        assert_eq!(unrescale(&a).unwrap(), h);
        assert!(rescale_height(&HeightFunction::new(vec![0; 1]).unwrap(), eps).unwrap().values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn fixed_point_at_time_zero() {
        let eps = 0.25;
        let f0 = rescale_height(&HeightFunction::narrow_wedge(0, 10), eps).unwrap();
        let v = rescaled_fixed_point_marginal(&f0, 0.0, eps, 0.0, &[0.0, 0.5], &SeededSource::new(1, 1)).unwrap();
        assert_eq!(v, vec![f0.eval(0.0).unwrap(), f0.eval(0.5).unwrap()]);
        assert!(rescaled_fixed_point_marginal(&f0, 10.0, eps, 1.0, &[0.0], &SeededSource::new(1, 1)).is_err());
    }
}
