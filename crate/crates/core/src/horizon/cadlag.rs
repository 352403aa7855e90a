//! Last passage across a stack of cadlag functions. Each line is a pure-jump function on
//! `(-∞, 0]` with atoms at negative integers, followed by a piecewise-linear Brownian
//! path on `[0, T]`. Every line vanishes at `0`.
//!
//! The passage value of a path is linear in each jump point between breakpoints, so the
//! supremum is a maximum over breakpoint sequences and a DP over breakpoints is exact.

use std::collections::BTreeMap;

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lpp::NEG;
use crate::rng::Stream;

/// Linear interpolation of a random walk with `N(μδ, 2δ)` steps, started at `0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BrownianPart {
    pub drift: f64,
    pub delta: f64,
    /// `B(mδ)` for `m = 0..=steps`.
    pub values: Vec<f64>,
}

impl BrownianPart {
    pub fn sample(drift: f64, delta: f64, steps: usize, stream: &mut Stream) -> Self {
        let sd = (2.0 * delta).sqrt();
        let mut values = Vec::with_capacity(steps + 1);
        let mut b = 0.0;
        values.push(b);
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(stream);
            b += drift * delta + sd * z;
            values.push(b);
        }
        BrownianPart { drift, delta, values }
    }

    pub fn zero(delta: f64, steps: usize) -> Self {
        BrownianPart { drift: 0.0, delta, values: vec![0.0; steps + 1] }
    }

    pub fn horizon(&self) -> f64 {
        self.delta * (self.values.len() - 1) as f64
    }

    pub fn increments(&self) -> Vec<f64> {
        self.values.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CadlagLine {
    /// Atom sizes keyed by negative integer position.
    pub atoms: BTreeMap<i64, f64>,
    pub brownian: BrownianPart,
}

/// Lines indexed `first_line, first_line + 1, …`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CadlagEnvironment {
    pub first_line: i64,
    pub lines: Vec<CadlagLine>,
}

struct Tables {
    points: Vec<f64>,
    /// Index of position `0`.
    zero: usize,
    f: Vec<Vec<f64>>,
    f_minus: Vec<Vec<f64>>,
}

impl CadlagEnvironment {
    pub fn new(first_line: i64, lines: Vec<CadlagLine>) -> Result<Self> {
        let env = CadlagEnvironment { first_line, lines };
        env.validate()?;
        Ok(env)
    }

    pub fn last_line(&self) -> i64 {
        self.first_line + self.lines.len() as i64 - 1
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.lines.first().ok_or_else(|| Error::Domain("no lines".into()))?;
        let (delta, len) = (first.brownian.delta, first.brownian.values.len());
        if !(delta > 0.0) || len == 0 {
            return domain("Brownian parts need δ > 0 and at least one value");
        }
        for l in &self.lines {
            if l.brownian.delta != delta || l.brownian.values.len() != len {
                return domain("all lines must share one Brownian grid");
            }
            if l.brownian.values[0] != 0.0 {
                return domain("Brownian parts must start at 0");
            }
            if l.atoms.iter().any(|(&p, &a)| p >= 0 || !(a >= 0.0) || !a.is_finite()) {
                return domain("atoms must be finite, nonnegative and at negative positions");
            }
        }
        Ok(())
    }

    fn delta(&self) -> f64 {
        self.lines[0].brownian.delta
    }

    fn steps(&self) -> usize {
        self.lines[0].brownian.values.len() - 1
    }

    /// Value `f_l(x)` at a breakpoint.
    pub fn value(&self, line: i64, x: f64) -> Result<f64> {
        let t = self.tables(x.min(0.0))?;
        let p = t.locate(x)?;
        Ok(t.f[self.line_index(line)?][p])
    }

    fn line_index(&self, line: i64) -> Result<usize> {
        if line < self.first_line || line > self.last_line() {
            return Err(Error::Range(format!("line {line} outside [{}, {}]", self.first_line, self.last_line())));
        }
        Ok((line - self.first_line) as usize)
    }

    fn tables(&self, from: f64) -> Result<Tables> {
        let lowest_atom = self.lines.iter().filter_map(|l| l.atoms.keys().next().copied()).min().unwrap_or(0);
        let lo = lowest_atom.min(from.floor() as i64).min(0);
        let delta = self.delta();
        let mut points: Vec<f64> = (lo..0).map(|p| p as f64).collect();
        let zero = points.len();
        points.extend((0..=self.steps()).map(|m| m as f64 * delta));
        let mut f = Vec::with_capacity(self.lines.len());
        let mut f_minus = Vec::with_capacity(self.lines.len());
        for l in &self.lines {
            let mut fl = vec![0.0; points.len()];
            let mut fm = vec![0.0; points.len()];
            let mut acc = 0.0;
            for p in (lo..0).rev() {
                let k = (p - lo) as usize;
                fl[k] = -acc;
                let a = l.atoms.get(&p).copied().unwrap_or(0.0);
                acc += a;
                fm[k] = -acc;
            }
            for (m, &b) in l.brownian.values.iter().enumerate() {
                fl[zero + m] = b;
                fm[zero + m] = b;
            }
            f.push(fl);
            f_minus.push(fm);
        }
        Ok(Tables { points, zero, f, f_minus })
    }

    /// `f(u; v)` (or `f^{Δ_K}(u; v)` when `hit = Some(K)`) for `u = (x, line)`, `v = (y, line)`.
    pub fn passage(&self, from: (f64, i64), to: (f64, i64), hit: Option<i64>) -> Result<f64> {
        let profile = self.profile(from, to.1, hit)?;
        let t = self.tables(from.0)?;
        let p = t.locate(to.0)?;
        let s = t.locate(from.0)?;
        if p < s {
            return domain(format!("need x ≤ y, got {} > {}", from.0, to.0));
        }
        Ok(profile[p - s])
    }

    /// Passage values from `from` to every breakpoint `≥ from.0` on line `to_line`.
    pub fn profile(&self, from: (f64, i64), to_line: i64, hit: Option<i64>) -> Result<Vec<f64>> {
        let a = self.line_index(from.1)?;
        let b = self.line_index(to_line)?;
        if b < a {
            return domain(format!("need line {} ≤ {}", from.1, to_line));
        }
        let t = self.tables(from.0)?;
        let s = t.locate(from.0)?;
        let n = t.points.len();
        let z_of = |l: usize| -> Option<usize> {
            let k = hit?;
            let z = (self.first_line + l as i64 - k) as f64;
            t.locate(z).ok()
        };
        let mut g = vec![NEG; n];
        let mut h = vec![NEG; n];
        let base = t.f_minus[a][s];
        let za = z_of(a);
        for p in s..n {
            g[p] = t.f[a][p] - base;
            if matches!(za, Some(z) if z >= s && z <= p) {
                h[p] = g[p];
            }
        }
        for l in a + 1..=b {
            let (fl, fm) = (&t.f[l], &t.f_minus[l]);
            let z = z_of(l);
            let mut run = NEG;
            let mut run_h = NEG;
            let mut run_z = NEG;
            let mut g_next = vec![NEG; n];
            let mut h_next = vec![NEG; n];
            for p in s..n {
                run = run.max(g[p] - fm[p]);
                run_h = run_h.max(h[p] - fm[p]);
                if Some(p) == z {
                    run_z = run;
                }
                g_next[p] = fl[p] + run;
                let via_z = if matches!(z, Some(zz) if p >= zz) { run_z } else { NEG };
                h_next[p] = fl[p] + run_h.max(via_z);
            }
            g = g_next;
            h = h_next;
        }
        let out = if hit.is_some() { h } else { g };
        Ok(out[s..].to_vec())
    }

    /// Breakpoint positions `≥ from`, aligned with [`profile`](Self::profile).
    pub fn breakpoints(&self, from: f64) -> Result<Vec<f64>> {
        let t = self.tables(from)?;
        let s = t.locate(from)?;
        Ok(t.points[s..].to_vec())
    }

    /// Index of `0` in [`breakpoints`](Self::breakpoints) from `from`.
    pub fn zero_index(&self, from: f64) -> Result<usize> {
        let t = self.tables(from)?;
        Ok(t.zero - t.locate(from)?)
    }
}

impl Tables {
    fn locate(&self, x: f64) -> Result<usize> {
        if x < 0.0 {
            if x.fract() != 0.0 || x < self.points[0] {
                return Err(Error::Range(format!("{x} is not an atom coordinate")));
            }
            return Ok((x - self.points[0]) as usize);
        }
        let delta = if self.points.len() > self.zero + 1 { self.points[self.zero + 1] } else { 1.0 };
        let m = (x / delta).round();
        let k = self.zero + m as usize;
        if k >= self.points.len() || (m * delta - x).abs() > 1e-9 * delta.max(x) {
            return Err(Error::Range(format!("{x} is not a grid point in [0, T]")));
        }
        Ok(k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(atoms: &[(i64, f64)], values: Vec<f64>) -> CadlagLine {
        CadlagLine {
            atoms: atoms.iter().copied().collect(),
            brownian: BrownianPart { drift: 0.0, delta: 0.5, values },
        }
    }

    #[test]
    fn single_line_is_an_increment() {
        let env = CadlagEnvironment::new(1, vec![line(&[(-2, 1.5)], vec![0.0, 0.3, -0.2, 0.7])]).unwrap();
        assert_eq!(env.passage((0.0, 1), (1.5, 1), None).unwrap(), 0.7);
        assert!((env.passage((0.5, 1), (1.0, 1), None).unwrap() - (-0.5)).abs() < 1e-15);
        // df([-2, 0]) includes the atom at -2
        assert_eq!(env.passage((-2.0, 1), (0.0, 1), None).unwrap(), 1.5);
        assert_eq!(env.passage((-1.0, 1), (0.0, 1), None).unwrap(), 0.0);
    }

    #[test]
    fn one_atom_on_the_upper_line() {
        let z = vec![0.0, 0.0];
        let env = CadlagEnvironment::new(1, vec![line(&[], z.clone()), line(&[(-1, 2.5)], z)]).unwrap();
        assert_eq!(env.passage((-1.0, 1), (0.0, 2), None).unwrap(), 2.5);
        assert_eq!(env.passage((-1.0, 1), (0.0, 2), Some(3)).unwrap(), 2.5);
        // Δ_2 meets line 2 at 0, line 1 at -1
        assert_eq!(env.passage((-1.0, 1), (0.0, 2), Some(2)).unwrap(), 2.5);
        assert_eq!(env.passage((0.0, 1), (0.0, 2), Some(3)).unwrap(), NEG);
    }

    #[test]
    fn hitting_never_increases() {
        let mut s = Stream::keyed(&[1]);
        let lines: Vec<CadlagLine> = (0..4)
            .map(|l| CadlagLine {
                atoms: (-3..0).filter(|p| (p + l) % 2 == 0).map(|p| (p, s.exp(1.0))).collect(),
                brownian: BrownianPart::sample(0.3, 0.1, 30, &mut s),
            })
            .collect();
        let env = CadlagEnvironment::new(1, lines).unwrap();
        for k in 2..7 {
            let a = env.profile((-3.0, 1), 4, None).unwrap();
            let b = env.profile((-3.0, 1), 4, Some(k)).unwrap();
            assert!(a.iter().zip(&b).all(|(x, y)| y <= x));
        }
        assert_eq!(env.breakpoints(-3.0).unwrap().len(), env.profile((-3.0, 1), 4, None).unwrap().len());
        assert!(env.passage((0.05, 1), (1.0, 2), None).is_err());
        assert!(env.passage((0.0, 1), (9.0, 2), None).is_err());
    }

    #[test]
    fn rejects_bad_atoms() {
        let bad = line(&[(0, 1.0)], vec![0.0]);
        assert!(CadlagEnvironment::new(1, vec![bad]).is_err());
    }
}
