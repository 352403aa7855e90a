//! Limit shapes, the KPZ 1:2:3 rescaling of half-space exponential LPP, and exponent fits.

use serde::{Deserialize, Serialize};

use crate::env::{EnvironmentSpec, Weights};
use crate::error::{domain, Result};
use crate::lpp::{self, Constraint, PassageQuery, Point, NEG};

fn check_nm(n: f64, m: f64) -> Result<()> {
    if !(n >= 1.0 && m >= 1.0) {
        return domain(format!("shape arguments must be at least 1, got n={n}, m={m}"));
    }
    Ok(())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0) {
        return domain(format!("α must be positive, got {alpha}"));
    }
    Ok(())
}

/// `μ(n,m) = (√n + √m)²`, the full-space exponential shape.
pub fn mu(n: f64, m: f64) -> Result<f64> {
    check_nm(n, m)?;
    Ok((n.sqrt() + m.sqrt()).powi(2))
}

/// Diagonal half-space shape: `4n` for `α ≥ 1/2`, else `n / (α(1-α))`.
pub fn mu_alpha(alpha: f64, n: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_nm(n, n)?;
    Ok(if alpha >= 0.5 { 4.0 * n } else { n / (alpha * (1.0 - alpha)) })
}

/// Off-diagonal half-space shape for `n ≥ m`. The boundary `α = r/(1+r)`, `r = √(m/n)`,
/// takes the `μ(n,m)` branch.
pub fn mu_alpha_nm(alpha: f64, n: f64, m: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_nm(n, m)?;
    if n < m {
        return domain(format!("need n ≥ m, got n={n}, m={m}"));
    }
    let r = (m / n).sqrt();
    if alpha < r / (1.0 + r) {
        Ok(m / alpha + n / (1.0 - alpha))
    } else {
        mu(n, m)
    }
}

/// `Δ_α(n) = μ_α(n) - 4n`.
pub fn delta_alpha(alpha: f64, n: f64) -> Result<f64> {
    Ok(mu_alpha(alpha, n)? - 4.0 * n)
}

/// `ν_α(n,m) = μ(n,m) + Δ_α(m)`.
pub fn nu_alpha(alpha: f64, n: f64, m: f64) -> Result<f64> {
    Ok(mu(n, m)? + delta_alpha(alpha, m)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ShapeKind {
    Mu,
    MuAlpha,
    MuAlphaNm,
    DeltaAlpha,
    NuAlpha,
}

/// Dispatch on `kind`; `args` is `(n,m)`, `(α,n)` or `(α,n,m)` as the kind requires.
pub fn shape(kind: ShapeKind, args: &[f64]) -> Result<f64> {
    let need = match kind {
        ShapeKind::Mu | ShapeKind::MuAlpha | ShapeKind::DeltaAlpha => 2,
        ShapeKind::MuAlphaNm | ShapeKind::NuAlpha => 3,
    };
    if args.len() != need {
        return domain(format!("{kind:?} takes {need} arguments, got {}", args.len()));
    }
    match kind {
        ShapeKind::Mu => mu(args[0], args[1]),
        ShapeKind::MuAlpha => mu_alpha(args[0], args[1]),
        ShapeKind::DeltaAlpha => delta_alpha(args[0], args[1]),
        ShapeKind::MuAlphaNm => mu_alpha_nm(args[0], args[1], args[2]),
        ShapeKind::NuAlpha => nu_alpha(args[0], args[1], args[2]),
    }
}

/// The map `(x,s) ↦ (⌊ns + 2^{5/3}n^{2/3}x⌋, ⌊ns⌋)` with boundary parameter
/// `α = 1/2 - 2^{-4/3} ρ n^{-1/3}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleMap {
    pub n: f64,
    pub rho: f64,
}

impl RescaleMap {
    pub fn new(n: f64, rho: f64) -> Result<Self> {
        let map = RescaleMap { n, rho };
        if !(n > 0.0) {
            return domain(format!("scale n must be positive, got {n}"));
        }
        if rho.is_nan() || rho == f64::INFINITY || !(map.alpha() > 0.0) {
            return domain(format!("ρ={rho} gives a nonpositive boundary rate at n={n}"));
        }
        Ok(map)
    }

    pub fn alpha(&self) -> f64 {
        0.5 - 2f64.powf(-4.0 / 3.0) * self.rho * self.n.powf(-1.0 / 3.0)
    }

    /// Field law matching this map: diagonal `Exp(α)`, bulk `Exp(1)`.
    pub fn environment(&self) -> EnvironmentSpec {
        EnvironmentSpec::half_space_exponential(self.alpha())
    }

    pub fn point(&self, x: f64, s: f64) -> Point {
        let n = self.n;
        let i = (n * s + 2f64.powf(5.0 / 3.0) * n.powf(2.0 / 3.0) * x).floor();
        let j = (n * s).floor();
        (i as i64, j as i64)
    }

    pub fn h(&self, x: f64, s: f64) -> f64 {
        4.0 * self.n * s + 2f64.powf(8.0 / 3.0) * self.n.powf(2.0 / 3.0) * x
    }

    /// `(X - 4n(t-s) - 2^{8/3}n^{2/3}(y-x)) / (2^{4/3}n^{1/3})`.
    pub fn normalize(&self, passage: f64, u: (f64, f64), v: (f64, f64)) -> f64 {
        if passage == NEG {
            return NEG;
        }
        (passage - (self.h(v.0, v.1) - self.h(u.0, u.1))) / (2f64.powf(4.0 / 3.0) * self.n.powf(1.0 / 3.0))
    }
}

/// `Q_n^ρ(x,s;y,t)` for each `(x,s,y,t)` in `points`, evaluated on `field`.
pub fn rescaled_lpp<W: Weights + ?Sized>(
    field: &W,
    map: &RescaleMap,
    points: &[(f64, f64, f64, f64)],
) -> Result<Vec<f64>> {
    points
        .iter()
        .map(|&(x, s, y, t)| {
            if x < 0.0 || y < 0.0 {
                return domain("rescaled points need x, y ≥ 0");
            }
            let u = map.point(x, s);
            let v = map.point(y, t);
            let q = PassageQuery::new(u, v).with(Constraint::HalfSpace);
            let value = lpp::passage_time(field, &q)?.value;
            Ok(map.normalize(value, (x, s), (y, t)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub stderr: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Least-squares slope of `log(statistic)` against `log(n)`.
pub fn fit_exponent(xs: &[(f64, f64)]) -> Result<ExponentFit> {
    if xs.len() < 3 {
        return domain(format!("need at least 3 points, got {}", xs.len()));
    }
    if xs.iter().any(|&(n, v)| !(n > 0.0 && v > 0.0)) {
        return domain("sizes and statistics must be positive");
    }
    let k = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = xs.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / k;
    let my = ly.iter().sum::<f64>() / k;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return domain("sizes must not all be equal");
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx.iter().zip(&ly).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let stderr = (rss / (k - 2.0) / sxx).sqrt();
    Ok(ExponentFit { slope, stderr, intercept, points: xs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes() {
        assert_eq!(mu(4.0, 1.0).unwrap(), 9.0);
        assert!((mu_alpha(0.25, 3.0).unwrap() - 16.0).abs() < 1e-12);
        assert_eq!(delta_alpha(0.7, 10.0).unwrap(), 0.0);
        assert_eq!(mu_alpha(0.5, 10.0).unwrap(), 40.0);
        assert!(mu(0.0, 1.0).is_err());
        assert!(mu_alpha_nm(0.3, 1.0, 2.0).is_err());
        assert!(shape(ShapeKind::Mu, &[1.0]).is_err());
    }

    #[test]
    fn threshold_tie_takes_full_space_branch() {
        // n = 4m gives r = 1/2 and threshold 1/3
        let a = 1.0 / 3.0;
        let r: f64 = (1.0f64 / 4.0).sqrt();
        assert_eq!(a, r / (1.0 + r));
        assert_eq!(mu_alpha_nm(a, 4.0, 1.0).unwrap(), 9.0);
    }

    #[test]
    fn map_origin() {
        let m = RescaleMap::new(1.0, 0.0).unwrap();
        assert_eq!(m.point(0.0, 0.0), (0, 0));
        assert_eq!(m.h(0.0, 0.0), 0.0);
        assert!(RescaleMap::new(1.0, 10.0).is_err());
        assert_eq!(RescaleMap::new(8.0, f64::NEG_INFINITY).unwrap().alpha(), f64::INFINITY);
    }

    #[test]
    fn kpz_scaling_of_maps() {
        for q in [2.0, 3.0] {
            let small = RescaleMap::new(7.0, 0.4).unwrap();
            let big = RescaleMap::new(7.0 * q * q * q, q * 0.4).unwrap();
            assert!((small.alpha() - big.alpha()).abs() < 1e-15);
            for (x, s) in [(0.0, 0.0), (0.3, 1.0), (1.1, 0.25)] {
                let a = small.point(q * q * x, q * q * q * s);
                let b = big.point(x, s);
                assert!((a.0 - b.0).abs() <= 1 && a.1 == b.1);
            }
        }
    }

    #[test]
    fn exact_power_laws() {
        let f = fit_exponent(&[(1.0, 3.0), (2.0, 6.0), (4.0, 12.0)]).unwrap();
        assert!((f.slope - 1.0).abs() < 1e-12 && f.stderr < 1e-12);
        let pts: Vec<(f64, f64)> = [10.0, 20.0, 40.0, 80.0].iter().map(|&n: &f64| (n, 2.0 * n.powf(2.0 / 3.0))).collect();
        assert!((fit_exponent(&pts).unwrap().slope - 2.0 / 3.0).abs() < 1e-12);
        assert!(fit_exponent(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
    }
}
