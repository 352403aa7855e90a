//! Positive-temperature partition functions and two-line RSK.

use serde::{Deserialize, Serialize};

use crate::env::{Kind, Weights};
use crate::error::{domain, Error, Result};
use crate::lpp::{self, logaddexp, Algebra, Constraint, PassageQuery, Point, NEG};
use crate::rng::Stream;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogPartition {
    pub log_z: f64,
    pub start: Point,
    pub end: Point,
    pub constraint: Constraint,
}

/// `log Z(u;v)` by a log-sum-exp DP; `-∞` when no admissible path exists.
pub fn log_partition<W: Weights + ?Sized>(field: &W, q: &PassageQuery) -> Result<LogPartition> {
    let log_z = lpp::query_value(field, Algebra::LogSum, q)?;
    Ok(LogPartition { log_z, start: q.start, end: q.end, constraint: q.constraint })
}

/// `log Σ_{i<m} Z(1,1; n+i, m-i)` over the half-space.
pub fn trapezoid_log_partition<W: Weights + ?Sized>(field: &W, n: i64, m: i64) -> Result<LogPartition> {
    trapezoid_log_partition_with(field, n, m, Constraint::HalfSpace)
}

pub fn trapezoid_log_partition_with<W: Weights + ?Sized>(
    field: &W,
    n: i64,
    m: i64,
    constraint: Constraint,
) -> Result<LogPartition> {
    let (values, _) = lpp::trapezoid_values(field, Algebra::LogSum, n, m, constraint)?;
    let log_z = values.into_iter().fold(NEG, logaddexp);
    Ok(LogPartition { log_z, start: (1, 1), end: (n, m), constraint })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TwoLineAlgebra {
    SumProduct,
    MaxPlus,
}

/// Inputs `(A, B)` on `⟦1,n⟧` and the RSK outputs `(Â, B̂)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwoLineEnvironment {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub a_hat: Vec<f64>,
    pub b_hat: Vec<f64>,
    pub algebra: TwoLineAlgebra,
}

impl TwoLineEnvironment {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// `G(a,b;x,y)` for 1-based `x ≤ y`: `max_j Σ_{x..j} a + Σ_{j..y} b`, or the
/// log of `Σ_j ∏_{x..j} a ∏_{j..y} b` when `log_space` (inputs already logged).
fn two_line_value(a: &[f64], b: &[f64], x: usize, y: usize, log_space: bool) -> f64 {
    let mut best = NEG;
    let mut prefix = 0.0;
    for j in x..=y {
        prefix += a[j - 1];
        let suffix: f64 = b[j - 1..y].iter().sum();
        let v = prefix + suffix;
        best = if log_space { logaddexp(best, v) } else { best.max(v) };
    }
    best
}

/// Cumulative first-row values `S_k` (log-space for `SumProduct`).
fn first_row(a: &[f64], b: &[f64], log_space: bool) -> Vec<f64> {
    let mut s = Vec::with_capacity(a.len());
    let mut prev = NEG;
    let mut p = 0.0;
    for k in 0..a.len() {
        p += a[k];
        let m = if log_space { logaddexp(prev, p) } else { prev.max(p) };
        prev = m + b[k];
        s.push(prev);
    }
    s
}

fn logs(xs: &[f64], what: &str) -> Result<Vec<f64>> {
    xs.iter()
        .map(|&x| {
            if x > 0.0 && x.is_finite() {
                Ok(x.ln())
            } else {
                domain(format!("sum-product entry {x} in {what} must be positive and finite"))
            }
        })
        .collect()
}

/// Two-line RSK: `Σ_{i≤k} B̂_i = max_{j≤k}(Σ_{i≤j}A_i + Σ_{i=j..k}B_i)` and
/// `Â_k + B̂_k = A_k + B_k`, or the multiplicative version.
pub fn rsk_two_line(a: &[f64], b: &[f64], algebra: TwoLineAlgebra) -> Result<TwoLineEnvironment> {
    if a.len() != b.len() {
        return domain(format!("line lengths differ: {} vs {}", a.len(), b.len()));
    }
    let (la, lb) = match algebra {
        TwoLineAlgebra::SumProduct => (logs(a, "A")?, logs(b, "B")?),
        TwoLineAlgebra::MaxPlus => {
            if a.iter().chain(b).any(|x| !x.is_finite()) {
                return domain("max-plus entries must be finite");
            }
            (a.to_vec(), b.to_vec())
        }
    };
    let log_space = algebra == TwoLineAlgebra::SumProduct;
    let s = first_row(&la, &lb, log_space);
    let mut a_hat = Vec::with_capacity(a.len());
    let mut b_hat = Vec::with_capacity(a.len());
    for k in 0..a.len() {
        let bh = if k == 0 { s[0] } else { s[k] - s[k - 1] };
        let ah = la[k] + lb[k] - bh;
        if log_space {
            b_hat.push(bh.exp());
            a_hat.push(ah.exp());
        } else {
            b_hat.push(bh);
            a_hat.push(ah);
        }
    }
    Ok(TwoLineEnvironment { a: a.to_vec(), b: b.to_vec(), a_hat, b_hat, algebra })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub n: usize,
    pub pairs_checked: usize,
    /// Largest absolute gap; log-space (relative) for `SumProduct`.
    pub max_violation: f64,
    pub worst: Option<(usize, usize)>,
    pub pass: bool,
}

/// Check the first-row identity for every `y` and the interior identity for `2 ≤ x ≤ y`.
pub fn verify_isometry(env: &TwoLineEnvironment, tol: f64) -> IsometryReport {
    let n = env.len();
    let log_space = env.algebra == TwoLineAlgebra::SumProduct;
    let prep = |xs: &[f64]| -> Vec<f64> {
        if log_space {
            xs.iter().map(|x| x.ln()).collect()
        } else {
            xs.to_vec()
        }
    };
    let (a, b, ah, bh) = (prep(&env.a), prep(&env.b), prep(&env.a_hat), prep(&env.b_hat));
    let mut max_violation: f64 = 0.0;
    let mut worst = None;
    let mut pairs = 0;
    let mut note = |gap: f64, x: usize, y: usize| {
        let gap = if gap.is_nan() { f64::INFINITY } else { gap };
        if gap > max_violation || (worst.is_none() && gap >= max_violation) {
            max_violation = max_violation.max(gap);
            worst = Some((x, y));
        }
    };
    let mut cum = 0.0;
    for y in 1..=n {
        cum += bh[y - 1];
        note((two_line_value(&a, &b, 1, y, log_space) - cum).abs(), 1, y);
        pairs += 1;
    }
    for x in 2..=n {
        for y in x..=n {
            let l = two_line_value(&a, &b, x, y, log_space);
            let r = two_line_value(&ah, &bh, x, y, log_space);
            note((l - r).abs(), x, y);
            pairs += 1;
        }
    }
    IsometryReport { n, pairs_checked: pairs, max_violation, worst, pass: max_violation < tol }
}

/// The two-line value `G(x,y)` on arbitrary sequences.
pub fn two_line_partition(a: &[f64], b: &[f64], x: usize, y: usize, algebra: TwoLineAlgebra) -> f64 {
    match algebra {
        TwoLineAlgebra::MaxPlus => two_line_value(a, b, x, y, false),
        TwoLineAlgebra::SumProduct => {
            let la: Vec<f64> = a.iter().map(|v| v.ln()).collect();
            let lb: Vec<f64> = b.iter().map(|v| v.ln()).collect();
            two_line_value(&la, &lb, x, y, true)
        }
    }
}

/// Parameters of a swapped pair: `A ~ L(γ₀+β_i)`, `B ~ L(γ₁+β_i)` against
/// `C ~ L(γ₁+β_i)`, `D ~ L(γ₀+β_i)`. Geometric parameters multiply instead of add.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapParams {
    pub kind: Kind,
    pub gamma0: f64,
    pub gamma1: f64,
    pub beta: Vec<f64>,
}

impl SwapParams {
    fn rate(&self, g: f64, i: usize) -> f64 {
        match self.kind {
            Kind::Geometric => g * self.beta[i],
            _ => g + self.beta[i],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.is_empty() {
            return domain("empty index interval");
        }
        match self.kind {
            Kind::Geometric => {
                if !(self.gamma0 > self.gamma1) {
                    return domain("geometric swap needs γ₀ > γ₁");
                }
                for (i, &b) in self.beta.iter().enumerate() {
                    let (p0, p1) = (self.rate(self.gamma0, i), self.rate(self.gamma1, i));
                    if !(b > 0.0 && p0 < 1.0 && p1 > 0.0) {
                        return domain(format!("geometric parameters out of (0,1) at index {}", i + 1));
                    }
                }
            }
            _ => {
                if !(self.gamma0 < self.gamma1) {
                    return domain("swap needs γ₀ < γ₁");
                }
                for i in 0..self.beta.len() {
                    if !(self.rate(self.gamma0, i) > 0.0) {
                        return domain(format!("γ₀ + β_{} must be positive", i + 1));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwapCoupling {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub d: Vec<f64>,
    /// Largest gap in the two-line identity over all `x ≤ y` (log-space for log-gamma).
    pub max_violation: f64,
}

fn sample_one(kind: Kind, p: f64, s: &mut Stream) -> f64 {
    use rand_distr::{Distribution, Gamma};
    match kind {
        Kind::Exponential => s.exp(p),
        Kind::Geometric => (s.uniform().ln() / p.ln()).floor(),
        Kind::LogGamma => 1.0 / Gamma::new(p, 1.0).expect("positive shape").sample(s),
    }
}

/// Rebuild `(C, D)` from RSK outputs and the final queue variable `v` (max-plus).
fn max_plus_preimage(ah: &[f64], bh: &[f64], v: f64) -> (Vec<f64>, Vec<f64>) {
    let n = ah.len();
    let (mut c, mut d) = (vec![0.0; n], vec![0.0; n]);
    let mut vk = v;
    for k in (0..n).rev() {
        if k > 0 && vk > bh[k] {
            c[k] = ah[k];
            d[k] = bh[k];
            vk = vk - bh[k] + ah[k];
        } else {
            c[k] = ah[k] + bh[k] - vk;
            d[k] = vk;
            vk = ah[k];
        }
    }
    (c, d)
}

/// Same in log coordinates for the multiplicative algebra; `u = log v`.
fn sum_product_preimage(lah: &[f64], lbh: &[f64], u: f64) -> (Vec<f64>, Vec<f64>) {
    let n = lah.len();
    let (mut c, mut d) = (vec![0.0; n], vec![0.0; n]);
    let mut lv = u;
    for k in (1..n).rev() {
        let prev = lah[k] + logaddexp(0.0, lv - lbh[k]);
        c[k] = lbh[k] + prev - lv;
        d[k] = lah[k] + lbh[k] - c[k];
        lv = prev;
    }
    d[0] = lv;
    c[0] = lah[0] + lbh[0] - lv;
    (c, d)
}

/// Sample the swapped pair `(C, D)` conditionally on sharing RSK output with `(A, B)`.
///
/// The preimage of an RSK output is a one-parameter family indexed by the final queue
/// variable; the conditional law on it is explicit for exponential and geometric weights
/// and a one-dimensional density for inverse-gamma weights.
pub fn coupled_swap_sampler(params: &SwapParams, stream: &mut Stream) -> Result<SwapCoupling> {
    params.validate()?;
    let n = params.beta.len();
    let a: Vec<f64> = (0..n).map(|i| sample_one(params.kind, params.rate(params.gamma0, i), stream)).collect();
    let b: Vec<f64> = (0..n).map(|i| sample_one(params.kind, params.rate(params.gamma1, i), stream)).collect();
    let (c, d, algebra) = match params.kind {
        Kind::Exponential | Kind::Geometric => {
            let env = rsk_two_line(&a, &b, TwoLineAlgebra::MaxPlus)?;
            let total: f64 = env.b_hat.iter().sum::<f64>() - env.a_hat[1..].iter().sum::<f64>();
            let vmax = total.max(0.0);
            let v = if params.kind == Kind::Exponential {
                let lam = params.gamma1 - params.gamma0;
                let u = stream.uniform();
                (vmax + (1.0 - u * (1.0 - (-lam * vmax).exp())).ln() / lam).clamp(0.0, vmax)
            } else {
                // P(v) ∝ (γ₀/γ₁)^v on {0, …, vmax}
                let r = params.gamma1 / params.gamma0;
                let top = vmax.round() as i64;
                let u = stream.uniform() * (1.0 - r.powi(top as i32 + 1));
                let k = ((1.0 - u).ln() / r.ln()).floor() as i64;
                (top - k.clamp(0, top)) as f64
            };
            let (c, d) = max_plus_preimage(&env.a_hat, &env.b_hat, v);
            (c, d, TwoLineAlgebra::MaxPlus)
        }
        Kind::LogGamma => {
            let env = rsk_two_line(&a, &b, TwoLineAlgebra::SumProduct)?;
            let lah: Vec<f64> = env.a_hat.iter().map(|x| x.ln()).collect();
            let lbh: Vec<f64> = env.b_hat.iter().map(|x| x.ln()).collect();
            let lam = params.gamma1 - params.gamma0;
            let density = |u: f64| {
                let (c, d) = sum_product_preimage(&lah, &lbh, u);
                let energy: f64 = c.iter().chain(&d).map(|x| (-x).exp()).sum();
                lam * u - energy
            };
            let la = logs(&a, "A")?;
            let u0 = first_row(&la, &logs(&b, "B")?, true)[n - 1] - la.iter().sum::<f64>();
            let u = sample_log_density(density, u0, stream);
            let (lc, ld) = sum_product_preimage(&lah, &lbh, u);
            (
                lc.iter().map(|x| x.exp()).collect(),
                ld.iter().map(|x| x.exp()).collect(),
                TwoLineAlgebra::SumProduct,
            )
        }
    };
    let mut max_violation: f64 = 0.0;
    for x in 1..=n {
        for y in x..=n {
            let l = two_line_partition(&a, &b, x, y, algebra);
            let r = two_line_partition(&c, &d, x, y, algebra);
            max_violation = max_violation.max((l - r).abs());
        }
    }
    Ok(SwapCoupling { a, b, c, d, max_violation })
}

/// Inverse-CDF sample from an unnormalized log density on ℝ with doubly exponential tails.
fn sample_log_density(g: impl Fn(f64) -> f64, center: f64, stream: &mut Stream) -> f64 {
    let center = if center.is_finite() { center } else { 0.0 };
    let coarse: Vec<f64> = (-800..=800).map(|k| center + k as f64 * 0.05).collect();
    let vals: Vec<f64> = coarse.iter().map(|&u| g(u)).collect();
    let top = vals.iter().copied().filter(|v| v.is_finite()).fold(NEG, f64::max);
    let keep: Vec<usize> = (0..coarse.len()).filter(|&k| vals[k] > top - 60.0).collect();
    let lo = coarse[keep[0].saturating_sub(1)];
    let hi = coarse[(keep[keep.len() - 1] + 1).min(coarse.len() - 1)];
    let m = 4000;
    let h = (hi - lo) / m as f64;
    let grid: Vec<f64> = (0..=m).map(|k| lo + k as f64 * h).collect();
    let dens: Vec<f64> = grid
        .iter()
        .map(|&u| {
            let v = g(u) - top;
            if v.is_finite() {
                v.exp()
            } else {
                0.0
            }
        })
        .collect();
    let mut cdf = vec![0.0; m + 1];
    for k in 1..=m {
        cdf[k] = cdf[k - 1] + 0.5 * h * (dens[k - 1] + dens[k]);
    }
    let target = stream.uniform() * cdf[m];
    let k = cdf.partition_point(|&c| c < target).clamp(1, m);
    // Invert the trapezoid on one cell: density is linear in between.
    let (f0, f1) = (dens[k - 1], dens[k]);
    let need = target - cdf[k - 1];
    let slope = (f1 - f0) / h;
    let t = if slope.abs() < 1e-300 {
        if f0 > 0.0 {
            need / f0
        } else {
            0.5 * h
        }
    } else {
        ((f0 * f0 + 2.0 * slope * need).max(0.0).sqrt() - f0) / slope
    };
    grid[k - 1] + t.clamp(0.0, h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{WeightField, Window};

    #[test]
    fn two_by_two_ones() {
        let f = WeightField::constant(Window::rect(2, 2), 1.0);
        let r = log_partition(&f, &PassageQuery::new((1, 1), (2, 2))).unwrap();
        assert!((r.log_z - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn strip() {
        let f = WeightField::from_rows(&[vec![2.0, 3.0, 0.5]]);
        let r = log_partition(&f, &PassageQuery::new((1, 1), (3, 1))).unwrap();
        assert!((r.log_z - 3f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn nonpositive_weight() {
        let f = WeightField::from_rows(&[vec![2.0, 0.0]]);
        let r = log_partition(&f, &PassageQuery::new((1, 1), (2, 1)));
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    #[test]
    fn trapezoid_counts() {
        let f = WeightField::constant(Window::rect(4, 4), 1.0);
        let r = trapezoid_log_partition_with(&f, 2, 2, Constraint::None).unwrap();
        assert!((r.log_z - 3f64.ln()).abs() < 1e-14);
        let one = trapezoid_log_partition(&f, 3, 1).unwrap();
        let direct = log_partition(&f, &PassageQuery::new((1, 1), (3, 1))).unwrap();
        assert_eq!(one.log_z, direct.log_z);
    }

    #[test]
    fn overflow_safe() {
        let f = WeightField::from_fn(Window::rect(6, 6), false, |i, j| {
            if (i + j) % 2 == 0 {
                1e300
            } else {
                1e-300
            }
        });
        let r = log_partition(&f, &PassageQuery::new((1, 1), (6, 6))).unwrap();
        assert!(r.log_z.is_finite());
    }

    #[test]
    fn max_plus_example() {
        let e = rsk_two_line(&[1.0, 4.0], &[2.0, 1.0], TwoLineAlgebra::MaxPlus).unwrap();
        assert_eq!(e.b_hat, vec![3.0, 3.0]);
        assert_eq!(e.a_hat, vec![0.0, 2.0]);
        let r = verify_isometry(&e, 1e-12);
        assert_eq!(r.max_violation, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn sum_product_single() {
        let e = rsk_two_line(&[2.0], &[3.0], TwoLineAlgebra::SumProduct).unwrap();
        assert!((e.b_hat[0] - 6.0).abs() < 1e-14);
        assert!((e.a_hat[0] - 1.0).abs() < 1e-14);
        assert!(rsk_two_line(&[0.0], &[3.0], TwoLineAlgebra::SumProduct).is_err());
    }

    #[test]
    fn ones_max_plus() {
        let e = rsk_two_line(&[1.0], &[1.0], TwoLineAlgebra::MaxPlus).unwrap();
        assert_eq!((e.a_hat[0], e.b_hat[0]), (0.0, 2.0));
    }

    #[test]
    fn json_round_trip() {
        let e = rsk_two_line(&[1.5, 0.25], &[2.0, 1.0], TwoLineAlgebra::SumProduct).unwrap();
        assert_eq!(TwoLineEnvironment::from_json(&e.to_json()).unwrap(), e);
    }

    #[test]
    fn preimage_recovers_input() {
        let a = [0.3, 1.7, 0.2, 0.9, 2.4];
        let b = [1.1, 0.4, 0.8, 0.05, 0.6];
        let e = rsk_two_line(&a, &b, TwoLineAlgebra::MaxPlus).unwrap();
        let s = first_row(&a, &b, false);
        let v = s[4] - a.iter().sum::<f64>();
        let (c, d) = max_plus_preimage(&e.a_hat, &e.b_hat, v);
        for k in 0..5 {
            assert!((c[k] - a[k]).abs() < 1e-12 && (d[k] - b[k]).abs() < 1e-12);
        }
        let la: Vec<f64> = a.iter().map(|x: &f64| x.ln()).collect();
        let lb: Vec<f64> = b.iter().map(|x: &f64| x.ln()).collect();
        let e = rsk_two_line(&a, &b, TwoLineAlgebra::SumProduct).unwrap();
        let s = first_row(&la, &lb, true);
        let u = s[4] - la.iter().sum::<f64>();
        let lah: Vec<f64> = e.a_hat.iter().map(|x| x.ln()).collect();
        let lbh: Vec<f64> = e.b_hat.iter().map(|x| x.ln()).collect();
        let (c, d) = sum_product_preimage(&lah, &lbh, u);
        for k in 0..5 {
            assert!((c[k] - la[k]).abs() < 1e-10 && (d[k] - lb[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn swap_is_exact() {
        let mut s = Stream::keyed(&[11]);
        for kind in [Kind::Exponential, Kind::LogGamma] {
            let p = SwapParams { kind, gamma0: 0.3, gamma1: 0.9, beta: vec![0.5; 10] };
            for _ in 0..50 {
                let cpl = coupled_swap_sampler(&p, &mut s).unwrap();
                assert!(cpl.max_violation < 1e-9, "{kind:?}: {}", cpl.max_violation);
            }
        }
        let p = SwapParams { kind: Kind::Geometric, gamma0: 0.8, gamma1: 0.5, beta: vec![0.9; 10] };
        for _ in 0..50 {
            let cpl = coupled_swap_sampler(&p, &mut s).unwrap();
            assert_eq!(cpl.max_violation, 0.0);
            assert!(cpl.c.iter().chain(&cpl.d).all(|x| *x >= 0.0 && x.fract() == 0.0));
        }
    }
}
