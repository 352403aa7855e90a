mod common;

use common::Lcg;
use hskpz::verify::{self, ks_one_sample, ks_two_sample, MCConfig};

fn brute_ks(a: &[f64], b: &[f64]) -> f64 {
    let ecdf = |xs: &[f64], t: f64| xs.iter().filter(|&&v| v <= t).count() as f64 / xs.len() as f64;
    a.iter().chain(b).map(|&t| (ecdf(a, t) - ecdf(b, t)).abs()).fold(0.0, f64::max)
}

#[test]
fn ks_statistics_match_direct_ecdf_comparison() {
    let mut rng = Lcg(41);
    for _ in 0..200 {
        let n = rng.range(1, 40) as usize;
        let m = rng.range(1, 40) as usize;
        // coarse values force ties
        let a: Vec<f64> = (0..n).map(|_| (rng.uniform() * 8.0).floor()).collect();
        let b: Vec<f64> = (0..m).map(|_| (rng.uniform() * 8.0).floor() + 0.5 * rng.range(0, 1) as f64).collect();
        assert!((ks_two_sample(&a, &b).unwrap() - brute_ks(&a, &b)).abs() < 1e-12);
    }
    let a: Vec<f64> = (0..50).map(|_| rng.uniform()).collect();
    let mut s = a.clone();
    s.sort_by(f64::total_cmp);
    let brute = s
        .iter()
        .enumerate()
        .map(|(i, &x)| ((i + 1) as f64 / 50.0 - x).max(x - i as f64 / 50.0))
        .fold(0.0, f64::max);
    assert!((ks_one_sample(&a, |x| x.clamp(0.0, 1.0)).unwrap() - brute).abs() < 1e-12);
}

#[test]
fn reports_do_not_depend_on_worker_count() {
    for suite in ["rsk-isometry", "burke", "deterministic-inequalities", "tasep-lpp", "permutation-invariance"] {
        let a = verify::run_suite(suite, &MCConfig::new(40, 3).with_workers(1)).unwrap();
        let b = verify::run_suite(suite, &MCConfig::new(40, 3).with_workers(3)).unwrap();
        assert_eq!(a.canonical_json(), b.canonical_json(), "{suite}");
        let c = verify::run_suite(suite, &MCConfig::new(40, 4).with_workers(1)).unwrap();
        if suite != "rsk-isometry" && suite != "deterministic-inequalities" {
            assert_ne!(a.canonical_json(), c.canonical_json(), "{suite}");
        }
    }
}

#[test]
fn suite_reports_serialize_as_json_and_csv() {
    let r = verify::run_suite("rsk-isometry", &MCConfig::new(20, 1)).unwrap();
    let v: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
    assert_eq!(v["suite"], "rsk-isometry");
    assert_eq!(r.to_csv().lines().count(), r.checks.len() + 1);
}
