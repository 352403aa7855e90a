//! Multi-level Poisson-avoiding metrics on the cylinder graph `Λ_d`.
//!
//! `H_d` is computed by sweeping the clock events in time order. Between events the
//! distance to every vertex is closed under the unit-cost edges of `Λ_d`. An event at `v`
//! forbids waiting through it, so the distance at `v` is reset from its in-neighbours.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::tasep::{self, ClockField, HeightFunction};

const INF: i64 = i64::MAX / 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CylinderGraph {
    pub d: usize,
}

impl CylinderGraph {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return domain("d must be positive");
        }
        Ok(CylinderGraph { d })
    }

    pub fn levels(&self) -> usize {
        2 * self.d
    }

    pub fn is_vertex(&self, (x, a): (usize, usize)) -> bool {
        a < self.levels() && (x + a) % 2 == 0
    }

    fn check(&self, v: (usize, usize)) -> Result<()> {
        if !self.is_vertex(v) {
            return domain(format!("({},{}) is not a vertex of Λ_{}", v.0, v.1, self.d));
        }
        Ok(())
    }

    pub fn out_neighbors(&self, (x, a): (usize, usize)) -> Vec<(usize, usize)> {
        let b = (a + 1) % self.levels();
        let mut out = vec![(x + 1, b)];
        if x >= 1 {
            out.push((x - 1, b));
        }
        out
    }

    /// BFS distance `D_d(u, v)`.
    pub fn distance(&self, u: (usize, usize), v: (usize, usize)) -> Result<usize> {
        self.check(u)?;
        self.check(v)?;
        let bound = u.0.max(v.0) + 2 * self.d + 2;
        let m = self.levels();
        let mut dist = vec![usize::MAX; (bound + 1) * m];
        let mut queue = VecDeque::from([u]);
        dist[u.0 * m + u.1] = 0;
        while let Some(w) = queue.pop_front() {
            let k = dist[w.0 * m + w.1];
            if w == v {
                return Ok(k);
            }
            for n in self.out_neighbors(w) {
                if n.0 <= bound && dist[n.0 * m + n.1] == usize::MAX {
                    dist[n.0 * m + n.1] = k + 1;
                    queue.push_back(n);
                }
            }
        }
        unreachable!("Λ_d is strongly connected")
    }

    /// The least `k ≥ |x_u - x_v|` with `k ≡ a_v - a_u (mod 2d)`.
    pub fn distance_formula(&self, u: (usize, usize), v: (usize, usize)) -> Result<usize> {
        self.check(u)?;
        self.check(v)?;
        let m = self.levels();
        let dx = u.0.abs_diff(v.0);
        let r = (v.1 + m - u.1) % m;
        Ok(if r >= dx { r } else { r + m * (dx - r).div_ceil(m) })
    }
}

/// A vertex of `Λ_d` at a time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: usize,
    pub a: usize,
    pub time: f64,
}

impl SpaceTimePoint {
    pub fn new(x: usize, a: usize, time: f64) -> Self {
        SpaceTimePoint { x, a, time }
    }
}

#[derive(Debug, Clone, Copy)]
struct Node {
    time: f64,
    x: usize,
    a: usize,
    prev: Option<usize>,
}

/// Distances at the final time on sites `[0, w)`, and optionally the predecessor arena.
struct Sweep {
    d: usize,
    dist: Vec<i64>,
    node_of: Vec<usize>,
    nodes: Vec<Node>,
}

impl Sweep {
    fn at(&self, x: usize, a: usize) -> i64 {
        self.dist[x * self.d + a / 2]
    }
}

fn sweep(clocks: &ClockField, w: usize, init: &[(usize, usize, i64)], s: f64, t: f64, track: bool) -> Sweep {
    let d = clocks.d;
    let m = 2 * d;
    let idx = |x: usize, a: usize| x * d + a / 2;
    let mut dist = vec![INF; w * d];
    let mut node_of = vec![usize::MAX; w * d];
    let mut nodes = Vec::new();
    let mut heap = BinaryHeap::new();
    for &(x, a, v) in init {
        if x < w && v < dist[idx(x, a)] {
            dist[idx(x, a)] = v;
            heap.push(Reverse((v, x, a)));
        }
    }
    if track {
        for &(x, a, v) in init {
            if x < w && dist[idx(x, a)] == v && node_of[idx(x, a)] == usize::MAX {
                node_of[idx(x, a)] = nodes.len();
                nodes.push(Node { time: s, x, a, prev: None });
            }
        }
    }
    while let Some(Reverse((v, x, a))) = heap.pop() {
        if v > dist[idx(x, a)] {
            continue;
        }
        let b = (a + 1) % m;
        for y in [x + 1, x.wrapping_sub(1)] {
            if y < w && v + 1 < dist[idx(y, b)] {
                dist[idx(y, b)] = v + 1;
                if track {
                    node_of[idx(y, b)] = nodes.len();
                    nodes.push(Node { time: s, x: y, a: b, prev: Some(node_of[idx(x, a)]) });
                }
                heap.push(Reverse((v + 1, y, b)));
            }
        }
    }

    let events: Vec<(f64, usize, usize)> = clocks.merged(s, t).into_iter().filter(|e| e.1 < w).collect();
    let mut k = 0;
    while k < events.len() {
        let r = events[k].0;
        let mut end = k;
        while end < events.len() && events[end].0 == r {
            end += 1;
        }
        let group = &events[k..end];
        for &(_, x, a) in group {
            dist[idx(x, a)] = INF;
        }
        // simultaneous events may feed each other, so relax until stable
        let mut changed = true;
        while changed {
            changed = false;
            for &(_, x, a) in group {
                let pa = (a + m - 1) % m;
                for y in [x + 1, x.wrapping_sub(1)] {
                    if y < w && dist[idx(y, pa)] + 1 < dist[idx(x, a)] {
                        dist[idx(x, a)] = dist[idx(y, pa)] + 1;
                        if track {
                            node_of[idx(x, a)] = nodes.len();
                            nodes.push(Node { time: r, x, a, prev: Some(node_of[idx(y, pa)]) });
                        }
                        changed = true;
                    }
                }
            }
        }
        k = end;
    }
    Sweep { d, dist, node_of, nodes }
}

fn check_times(clocks: &ClockField, s: f64, t: f64) -> Result<()> {
    if !(s < t) {
        return domain(format!("need s < t, got s={s}, t={t}"));
    }
    if s < 0.0 || t > clocks.horizon {
        return domain(format!("[{s}, {t}] is outside the clock horizon [0, {}]", clocks.horizon));
    }
    Ok(())
}

fn check_point(clocks: &ClockField, p: &SpaceTimePoint) -> Result<()> {
    CylinderGraph::new(clocks.d)?.check((p.x, p.a))?;
    if p.x >= clocks.sites {
        return domain(format!("site {} is outside the clock field", p.x));
    }
    Ok(())
}

/// `H_d(p; q)`.
pub fn pam_distance(clocks: &ClockField, p: SpaceTimePoint, q: SpaceTimePoint) -> Result<i64> {
    Ok(point_sweep(clocks, p, q, false)?.0)
}

fn point_sweep(clocks: &ClockField, p: SpaceTimePoint, q: SpaceTimePoint, track: bool) -> Result<(i64, Sweep)> {
    check_point(clocks, &p)?;
    check_point(clocks, &q)?;
    check_times(clocks, p.time, q.time)?;
    let x_max = p.x.max(q.x);
    let mut w = (x_max + 2 * clocks.d + 8).min(clocks.sites);
    loop {
        let sw = sweep(clocks, w, &[(p.x, p.a, 0)], p.time, q.time, track);
        let v = sw.at(q.x, q.a);
        // leaving [0, w) costs at least the round trip to site w
        let escape = (2 * w - p.x - q.x) as i64;
        if v < escape {
            return Ok((v, sw));
        }
        if w == clocks.sites {
            return Err(Error::Padding(format!("H_d value {v} needs more than {} sites", clocks.sites)));
        }
        w = (x_max + v as usize / 2 + 2).max(2 * w).min(clocks.sites);
    }
}

/// `H_d⁻(x, s; y, t)`: the minimum over all levels at both ends.
pub fn pam_distance_reduced(clocks: &ClockField, x: usize, s: f64, y: usize, t: f64) -> Result<i64> {
    check_times(clocks, s, t)?;
    if x.max(y) >= clocks.sites {
        return domain("sites outside the clock field");
    }
    let m = 2 * clocks.d;
    let init: Vec<(usize, usize, i64)> = (0..m).filter(|a| (x + a) % 2 == 0).map(|a| (x, a, 0)).collect();
    let x_max = x.max(y);
    let mut w = (x_max + 2 * clocks.d + 8).min(clocks.sites);
    loop {
        let sw = sweep(clocks, w, &init, s, t, false);
        let v = (0..m).filter(|b| (y + b) % 2 == 0).map(|b| sw.at(y, b)).min().unwrap();
        if v < (2 * w - x - y) as i64 {
            return Ok(v);
        }
        if w == clocks.sites {
            return Err(Error::Padding(format!("H_d⁻ value {v} needs more than {} sites", clocks.sites)));
        }
        w = (x_max + v as usize / 2 + 2).max(2 * w).min(clocks.sites);
    }
}

/// Minimum and maximum of `H_d(x,a,s; y,b,t)` over all levels `a`, `b`.
pub fn level_spread(clocks: &ClockField, x: usize, s: f64, y: usize, t: f64) -> Result<(i64, i64)> {
    let m = 2 * clocks.d;
    let mut lo = i64::MAX;
    let mut hi = i64::MIN;
    for a in (0..m).filter(|a| (x + a) % 2 == 0) {
        for b in (0..m).filter(|b| (y + b) % 2 == 0) {
            let v = pam_distance(clocks, SpaceTimePoint::new(x, a, s), SpaceTimePoint::new(y, b, t))?;
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    Ok((lo, hi))
}

/// A trajectory as its jump points `(time, x, a)`: it waits at each point's vertex until
/// the next point's time, then steps along an edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Geodesic {
    pub start: f64,
    pub end: f64,
    pub points: Vec<(f64, usize, usize)>,
    pub value: i64,
}

impl Geodesic {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("time,x,a\n");
        for (t, x, a) in &self.points {
            out.push_str(&format!("{t},{x},{a}\n"));
        }
        out
    }

    /// Recomputed cost, after checking each step is an edge and each wait avoids the clocks.
    pub fn cost(&self, clocks: &ClockField) -> Result<i64> {
        let g = CylinderGraph::new(clocks.d)?;
        let mut cost = 0;
        for (k, &(t, x, a)) in self.points.iter().enumerate() {
            let until = self.points.get(k + 1).map_or(self.end, |p| p.0);
            if clocks.events_at(x, a).iter().any(|&r| r > t && r <= until) {
                return domain(format!("the trajectory waits at ({x},{a}) through a clock ring"));
            }
            if let Some(&(_, y, b)) = self.points.get(k + 1) {
                if !g.out_neighbors((x, a)).contains(&(y, b)) {
                    return domain(format!("({x},{a}) → ({y},{b}) is not an edge"));
                }
                cost += 1;
            }
        }
        Ok(cost)
    }
}

/// A geodesic for `H_d(p; q)` recovered from the predecessor links of the sweep.
pub fn pam_geodesic(clocks: &ClockField, p: SpaceTimePoint, q: SpaceTimePoint) -> Result<Geodesic> {
    let (value, sw) = point_sweep(clocks, p, q, true)?;
    let mut points = Vec::new();
    let mut k = Some(sw.node_of[q.x * sw.d + q.a / 2]);
    while let Some(i) = k {
        let n = sw.nodes[i];
        points.push((n.time, n.x, n.a));
        k = n.prev;
    }
    points.reverse();
    Ok(Geodesic { start: p.time, end: q.time, points, value })
}

/// `h_t(x) = min_{y, a} h_0(y) + H_d(π(y, h_0(y)), 0; x, a, t)` at each `x`.
pub fn heights_from_metric(clocks: &ClockField, h0: &HeightFunction, t: f64, xs: &[usize]) -> Result<Vec<i64>> {
    if !(t > 0.0) {
        if t == 0.0 {
            return Ok(xs.iter().map(|&x| h0.get(x)).collect());
        }
        return domain(format!("time {t} must be nonnegative"));
    }
    check_times(clocks, 0.0, t)?;
    let m = (2 * clocks.d) as i64;
    let w = clocks.sites;
    let init: Vec<(usize, usize, i64)> =
        (0..w).map(|y| (y, h0.get(y).rem_euclid(m) as usize, h0.get(y))).collect();
    let sw = sweep(clocks, w, &init, 0.0, t, false);
    xs.iter()
        .map(|&x| {
            if x >= w {
                return domain(format!("site {x} outside the clock field"));
            }
            let v = (0..m as usize).filter(|a| (x + a) % 2 == 0).map(|a| sw.at(x, a)).min().unwrap();
            // any path through site w costs at least h0(w) + w - x
            if v >= h0.get(w) + (w - x) as i64 {
                return Err(Error::Padding(format!("height at {x} may depend on sites beyond {w}")));
            }
            Ok(v)
        })
        .collect()
}

/// Both sides of the d-coupling identity agree at every site in `xs`.
pub fn tasep_coupling_check(clocks: &ClockField, h0: &HeightFunction, t: f64, xs: &[usize]) -> Result<bool> {
    let x_max = xs.iter().copied().max().unwrap_or(0);
    let evolved = tasep::evolve_observed(h0, clocks, t, x_max)?;
    let metric = heights_from_metric(clocks, h0, t, xs)?;
    Ok(xs.iter().zip(&metric).all(|(&x, &v)| evolved.get(x) == v))
}

/// Sites needed to evaluate `H_d⁻` up to site `x_max` over a time span `t`.
pub fn pam_window(x_max: usize, d: usize, t: f64) -> usize {
    x_max + 2 * d + (0.35 * t + 10.0 * t.sqrt()).ceil() as usize + 16
}

/// `-ε^{1/2} H_d⁻(⌊2x/ε⌋, 2ε^{-3/2}s; ⌊2y/ε⌋, 2ε^{-3/2}t) + (t-s)/ε` at each `(x, s, y, t)`.
pub fn rescaled_pam(clocks: &ClockField, rho: f64, eps: f64, points: &[(f64, f64, f64, f64)]) -> Result<Vec<f64>> {
    if !(eps > 0.0) {
        return domain(format!("ε={eps} must be positive"));
    }
    let alpha = tasep::tasep_alpha(rho, eps);
    let matches = if rho == f64::NEG_INFINITY { clocks.alpha >= 0.5 } else { (clocks.alpha - alpha).abs() < 1e-12 };
    if !(alpha > 0.0) || !matches {
        return domain(format!("clock boundary rate {} does not match α={alpha}", clocks.alpha));
    }
    let scale = 2.0 * eps.powf(-1.5);
    points
        .iter()
        .map(|&(x, s, y, t)| {
            if x < 0.0 || y < 0.0 {
                return domain("rescaled points need x, y ≥ 0");
            }
            let xi = (2.0 * x / eps).floor() as usize;
            let yi = (2.0 * y / eps).floor() as usize;
            let h = pam_distance_reduced(clocks, xi, scale * s, yi, scale * t)?;
            Ok(-eps.sqrt() * h as f64 + (t - s) / eps)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::SeededSource;

    #[test]
    fn cylinder_distances() {
        let g2 = CylinderGraph::new(2).unwrap();
        assert_eq!(g2.distance((0, 0), (2, 2)).unwrap(), 2);
        let g1 = CylinderGraph::new(1).unwrap();
        assert_eq!(g1.distance((3, 1), (1, 1)).unwrap(), 2);
        assert_eq!(g1.distance((3, 1), (3, 1)).unwrap(), 0);
        assert!(g1.distance((3, 0), (1, 1)).is_err());
        for d in 1..5 {
            let g = CylinderGraph::new(d).unwrap();
            for x in 0..6 {
                for y in 0..6 {
                    for a in (0..2 * d).filter(|a| (x + a) % 2 == 0) {
                        for b in (0..2 * d).filter(|b| (y + b) % 2 == 0) {
                            assert_eq!(g.distance((x, a), (y, b)).unwrap(), g.distance_formula((x, a), (y, b)).unwrap());
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn empty_field_is_graph_distance() {
        let c = ClockField::empty(2, 0.7, 20, 5.0).unwrap();
        let g = CylinderGraph::new(2).unwrap();
        let v = pam_distance(&c, SpaceTimePoint::new(1, 1, 0.0), SpaceTimePoint::new(4, 2, 3.0)).unwrap();
        assert_eq!(v as usize, g.distance((1, 1), (4, 2)).unwrap());
        assert_eq!(pam_distance_reduced(&c, 7, 0.0, 3, 1.0).unwrap(), 4);
        assert!(pam_distance(&c, SpaceTimePoint::new(1, 1, 2.0), SpaceTimePoint::new(4, 2, 1.0)).is_err());
    }

    #[test]
    fn a_single_ring_costs_two() {
        // d large, stay at (5, 1); a ring forces a detour to a neighbour and back
        let c = ClockField::from_events(4, 1.0, 20, 5.0, &[((5, 1), 2.0)]).unwrap();
        let p = SpaceTimePoint::new(5, 1, 0.0);
        let q = SpaceTimePoint::new(5, 3, 4.0);
        assert_eq!(pam_distance(&c, p, q).unwrap(), 2);
        let stay = SpaceTimePoint::new(5, 1, 4.0);
        assert_eq!(pam_distance(&c, p, stay).unwrap(), 8);
        // a ring exactly at the start time does not block
        let c0 = ClockField::from_events(4, 1.0, 20, 5.0, &[((5, 1), 1.0)]).unwrap();
        assert_eq!(pam_distance(&c0, SpaceTimePoint::new(5, 1, 1.0), stay).unwrap(), 0);
        // ... but a ring at the end time does
        assert_eq!(pam_distance(&c0, SpaceTimePoint::new(5, 1, 0.0), SpaceTimePoint::new(5, 1, 1.0)).unwrap(), 8);
    }

    #[test]
    fn geodesics_recompute_their_value() {
        let c = ClockField::sample(2, 0.7, 40, 6.0, &SeededSource::new(4, 1)).unwrap();
        for (x, y) in [(0, 3), (5, 5), (8, 1)] {
            let p = SpaceTimePoint::new(x, x % 2, 0.5);
            let q = SpaceTimePoint::new(y, y % 2 + 2, 5.5);
            let geo = pam_geodesic(&c, p, q).unwrap();
            assert_eq!(geo.value, pam_distance(&c, p, q).unwrap());
            assert_eq!(geo.cost(&c).unwrap(), geo.value);
            assert_eq!((geo.points[0].1, geo.points[0].2), (x, x % 2));
            assert_eq!(*geo.points.last().unwrap(), (geo.points.last().unwrap().0, q.x, q.a));
        }
    }

    #[test]
    fn coupling_identity() {
        for d in [1, 3] {
            for seed in 0..10 {
                let c = ClockField::sample(d, 0.7, 90, 10.0, &SeededSource::new(seed, d as u64)).unwrap();
                let h0 = HeightFunction::narrow_wedge(0, 1);
                let xs: Vec<usize> = (0..=30).collect();
                assert!(tasep_coupling_check(&c, &h0, 10.0, &xs).unwrap(), "d={d} seed={seed}");
                assert!(tasep_coupling_check(&c, &HeightFunction::flat(4), 10.0, &xs).unwrap());
            }
        }
    }

    #[test]
    fn reversal_symmetry() {
        let c = ClockField::sample(2, 0.7, 60, 8.0, &SeededSource::new(9, 3)).unwrap();
        let r = c.time_reversed();
        for (x, s, y, t) in [(0, 1.0, 4, 7.0), (6, 0.5, 2, 8.0), (3, 2.0, 3, 2.5)] {
            let fwd = pam_distance_reduced(&c, x, s, y, t).unwrap();
            let back = pam_distance_reduced(&r, y, 8.0 - t, x, 8.0 - s).unwrap();
            assert_eq!(fwd, back);
        }
    }

    #[test]
    fn rescaled_needs_matching_rate() {
        let eps = 0.25;
        let c = ClockField::sample(1, tasep::tasep_alpha(0.0, eps), 80, 2.0 * eps.powf(-1.5), &SeededSource::new(1, 1)).unwrap();
        let v = rescaled_pam(&c, 0.0, eps, &[(0.0, 0.0, 0.0, 1.0)]).unwrap();
        assert!(v[0].is_finite());
        assert!(rescaled_pam(&c, 1.0, eps, &[(0.0, 0.0, 0.0, 1.0)]).is_err());
    }
}
