//! Exhaustive path enumeration oracles shared by the integration tests.
#![allow(dead_code)]

use hskpz::lpp::{Constraint, PassageQuery, Point, NEG};
use hskpz::Weights;

/// Every up-right lattice path from `a` to `b`, cells listed in order.
pub fn paths(a: Point, b: Point) -> Vec<Vec<Point>> {
    let mut out = Vec::new();
    if a.0 > b.0 || a.1 > b.1 {
        return out;
    }
    let mut cur = vec![a];
    walk(a, b, &mut cur, &mut out);
    out
}

fn walk(p: Point, b: Point, cur: &mut Vec<Point>, out: &mut Vec<Vec<Point>>) {
    if p == b {
        out.push(cur.clone());
        return;
    }
    for q in [(p.0 + 1, p.1), (p.0, p.1 + 1)] {
        if q.0 <= b.0 && q.1 <= b.1 {
            cur.push(q);
            walk(q, b, cur, out);
            cur.pop();
        }
    }
}

/// Whether a whole path satisfies the constraint, judged from its cell set.
pub fn admissible(path: &[Point], c: Constraint) -> bool {
    match c {
        Constraint::None => true,
        Constraint::HalfSpace => path.iter().all(|&(i, j)| i >= j),
        Constraint::DiagonalCondition => {
            !path.iter().any(|&(i, j)| i == j && path.contains(&(i - 1, i)))
        }
        Constraint::HitShiftedDiagonal(k) => path.iter().any(|&(i, j)| j - i == k),
        Constraint::Parallelogram { n, ell } => {
            let half = ell * (n as f64).powf(2.0 / 3.0);
            path.iter().all(|&(i, j)| ((j - i) as f64).abs() <= half && i + j >= 2 && i + j <= 2 * n)
        }
    }
}

fn path_sum<W: Weights + ?Sized>(w: &W, path: &[Point], with_start: bool) -> f64 {
    let skip = usize::from(!with_start);
    path.iter().skip(skip).map(|&(i, j)| w.weight(i, j)).sum()
}

/// Maximum path weight over admissible paths, `-∞` if there are none.
pub fn brute_passage<W: Weights + ?Sized>(w: &W, q: &PassageQuery) -> f64 {
    paths(q.start, q.end)
        .iter()
        .filter(|p| admissible(p, q.constraint))
        .map(|p| path_sum(w, p, q.include_start_weight))
        .fold(NEG, f64::max)
}

/// `log Σ_paths Π weights`, computed as a plain sum of products.
pub fn brute_log_partition<W: Weights + ?Sized>(w: &W, q: &PassageQuery) -> f64 {
    let skip = usize::from(!q.include_start_weight);
    let z: f64 = paths(q.start, q.end)
        .iter()
        .filter(|p| admissible(p, q.constraint))
        .map(|p| p.iter().skip(skip).map(|&(i, j)| w.weight(i, j)).product::<f64>())
        .sum();
    z.ln()
}

/// Sum of weights along a given path, start included.
pub fn weight_of<W: Weights + ?Sized>(w: &W, path: &[Point]) -> f64 {
    path_sum(w, path, true)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    a == b || (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

/// A small deterministic generator for test inputs, independent of the library RNG.
pub struct Lcg(pub u64);

impl Lcg {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut z = self.0;
        z ^= z >> 33;
        z = z.wrapping_mul(0xff51afd7ed558ccd);
        z ^ (z >> 33)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn range(&mut self, lo: i64, hi: i64) -> i64 {
        lo + (self.next_u64() % (hi - lo + 1) as u64) as i64
    }
}
