//! Empirical distribution statistics used by the suites.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

fn sorted(xs: &[f64]) -> Result<Vec<f64>> {
    if xs.is_empty() {
        return domain("empty sample");
    }
    if xs.iter().any(|x| x.is_nan()) {
        return domain("sample contains NaN");
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v)
}

/// Sup-distance between the empirical CDFs of `a` and `b`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    let a = sorted(a)?;
    let b = sorted(b)?;
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Sup-distance between the empirical CDF of `a` and a continuous `cdf`.
pub fn ks_one_sample(a: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let a = sorted(a)?;
    let n = a.len() as f64;
    let mut d: f64 = 0.0;
    for (k, &x) in a.iter().enumerate() {
        let f = cdf(x);
        d = d.max((k as f64 + 1.0) / n - f).max(f - k as f64 / n);
    }
    Ok(d)
}

pub fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |x| if x <= 0.0 { 0.0 } else { -(-rate * x).exp_m1() }
}

pub fn normal_cdf(mean: f64, var: f64) -> impl Fn(f64) -> f64 {
    let s = var.sqrt();
    move |x| 0.5 * libm::erfc(-(x - mean) / (s * std::f64::consts::SQRT_2))
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Unbiased sample variance.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn correlation(xs: &[f64], ys: &[f64]) -> f64 {
    let (mx, my) = (mean(xs), mean(ys));
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx).powi(2);
        syy += (y - my).powi(2);
    }
    sxy / (sxx * syy).sqrt()
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut k = 0;
    while k < idx.len() {
        let mut e = k;
        while e + 1 < idx.len() && xs[idx[e + 1]] == xs[idx[k]] {
            e += 1;
        }
        let avg = (k + e) as f64 / 2.0;
        for &i in &idx[k..=e] {
            r[i] = avg;
        }
        k = e + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(xs: &[f64], ys: &[f64]) -> f64 {
    correlation(&ranks(xs), &ranks(ys))
}

/// Lag-1 correlation of consecutive pairs `(x_k, x_{k+1})` pooled over all `series`.
pub fn lag1_autocorrelation(series: &[Vec<f64>]) -> f64 {
    let mut a = Vec::new();
    let mut b = Vec::new();
    for s in series {
        for w in s.windows(2) {
            a.push(w[0]);
            b.push(w[1]);
        }
    }
    correlation(&a, &b)
}

/// Ordinary least squares `y = a + b x`; returns `(a, b, R²)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let (mx, my) = (mean(xs), mean(ys));
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let b = sxy / sxx;
    let a = my - b * mx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    (a, b, r2)
}

/// Two-sample threshold at roughly the 0.1% level, never below the quoted value.
pub fn two_sample_threshold(quoted: f64, n: usize, m: usize) -> f64 {
    let (n, m) = (n as f64, m as f64);
    quoted.max(1.95 * ((n + m) / (n * m)).sqrt())
}

pub fn one_sample_threshold(quoted: f64, n: usize) -> f64 {
    quoted.max(1.95 / (n as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KsKind {
    OneSample,
    TwoSample,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KsReport {
    pub observable: String,
    pub kind: KsKind,
    pub statistic: f64,
    pub threshold: f64,
    pub pass: bool,
    pub n: usize,
}

impl KsReport {
    pub fn two_sample(observable: impl Into<String>, a: &[f64], b: &[f64], quoted: f64) -> Result<Self> {
        let statistic = ks_two_sample(a, b)?;
        let threshold = two_sample_threshold(quoted, a.len(), b.len());
        Ok(KsReport {
            observable: observable.into(),
            kind: KsKind::TwoSample,
            statistic,
            threshold,
            pass: statistic < threshold,
            n: a.len().min(b.len()),
        })
    }

    pub fn one_sample(
        observable: impl Into<String>,
        a: &[f64],
        cdf: impl Fn(f64) -> f64,
        quoted: f64,
    ) -> Result<Self> {
        let statistic = ks_one_sample(a, cdf)?;
        let threshold = one_sample_threshold(quoted, a.len());
        Ok(KsReport {
            observable: observable.into(),
            kind: KsKind::OneSample,
            statistic,
            threshold,
            pass: statistic < threshold,
            n: a.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_sample_examples() {
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 1.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0], &[1.5, 2.5]).unwrap(), 0.5);
        assert!(ks_two_sample(&[], &[1.0]).is_err());
    }

    #[test]
    fn one_sample_uniform() {
        let xs: Vec<f64> = (0..100).map(|k| (k as f64 + 0.5) / 100.0).collect();
        let d = ks_one_sample(&xs, |x| x.clamp(0.0, 1.0)).unwrap();
        assert!((d - 0.005).abs() < 1e-12);
    }

    #[test]
    fn cdfs() {
        assert!((normal_cdf(0.0, 1.0)(1.96) - 0.975).abs() < 1e-3);
        assert!((exp_cdf(2.0)(0.5) - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn thresholds() {
        assert_eq!(two_sample_threshold(0.02, 50_000, 50_000), 0.02);
        assert!(two_sample_threshold(0.02, 100, 100) > 0.27);
        assert!((one_sample_threshold(0.0, 10_000) - 0.0195).abs() < 1e-12);
    }

    #[test]
    fn rank_correlation_with_ties() {
        assert!((spearman(&[1.0, 2.0, 2.0, 3.0], &[10.0, 20.0, 20.0, 30.0]) - 1.0).abs() < 1e-12);
        let (a, b, r2) = linear_fit(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]);
        assert!((a - 1.0).abs() < 1e-12 && (b - 2.0).abs() < 1e-12 && (r2 - 1.0).abs() < 1e-12);
    }
}
