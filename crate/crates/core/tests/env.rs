use hskpz::env::{self, sample_weight};
use hskpz::verify::{correlation, mean};
use hskpz::{EnvironmentSpec, LazyField, SeededSource, Weights, Window};

#[test]
fn lazy_and_materialized_fields_agree() {
    let spec = EnvironmentSpec::half_space_log_gamma(0.8, 1.3).with_window(Window::rect(10, 10));
    let src = SeededSource::new(17, 3);
    let dense = env::materialize(&spec, &src).unwrap();
    let lazy = LazyField::new(spec.clone(), src).unwrap();
    for i in 1..=10 {
        for j in 1..=10 {
            let v = dense.weight(i, j);
            assert_eq!(v, lazy.weight(i, j));
            assert_eq!(v, sample_weight(&spec, &src, i, j).unwrap());
            assert_eq!(v, dense.weight(j, i));
        }
    }
    assert_eq!(dense.values(), env::materialize(&spec, &src).unwrap().values());
}

#[test]
fn streams_and_seeds_are_distinct() {
    let spec = EnvironmentSpec::half_space_exponential(1.0).with_window(Window::rect(4, 4));
    let a = env::materialize(&spec, &SeededSource::new(1, 0)).unwrap();
    let b = env::materialize(&spec, &SeededSource::new(1, 1)).unwrap();
    let c = env::materialize(&spec, &SeededSource::new(2, 0)).unwrap();
    assert_ne!(a.values(), b.values());
    assert_ne!(a.values(), c.values());
}

#[test]
fn exponential_means_and_independence() {
    let n = 100_000;
    for (k, rate) in [0.25, 0.5, 1.0, 2.0].into_iter().enumerate() {
        // column 1 carries Exp(rate)
        let spec = EnvironmentSpec::column_exponential(rate);
        let xs: Vec<f64> = (0..n)
            .map(|r| sample_weight(&spec, &SeededSource::new(40 + k as u64, r), 1, 2).unwrap())
            .collect();
        let sigma = 1.0 / rate;
        assert!((mean(&xs) - 1.0 / rate).abs() < 4.0 * sigma / (n as f64).sqrt(), "rate {rate}");
    }
    let spec = EnvironmentSpec::half_space_exponential(0.7);
    let pairs: Vec<(f64, f64)> = (0..10_000)
        .map(|r| {
            let s = SeededSource::new(5, r);
            (sample_weight(&spec, &s, 3, 1).unwrap(), sample_weight(&spec, &s, 4, 1).unwrap())
        })
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
    assert!(correlation(&x, &y).abs() < 0.05);
}

#[test]
fn degenerate_conventions() {
    let spec = EnvironmentSpec::half_space_exponential(0.3).with_gamma(2, -0.5);
    let s = SeededSource::new(1, 0);
    assert_eq!(sample_weight(&spec, &s, 2, 2).unwrap(), f64::INFINITY);
    assert!(sample_weight(&spec, &s, 3, 3).unwrap().is_finite());
    let frozen = EnvironmentSpec::half_space_exponential(f64::INFINITY);
    assert_eq!(sample_weight(&frozen, &s, 4, 4).unwrap(), 0.0);
}

#[test]
fn overrides() {
    let spec = EnvironmentSpec::half_space_exponential(1.0).with_window(Window::rect(5, 5));
    let f = env::materialize(&spec, &SeededSource::new(9, 9)).unwrap();
    assert_eq!(f.override_cells(&[]).unwrap().values(), f.values());
    let g = f.override_cells(&[((1, 2), 3.0), ((1, 1), 7.0)]).unwrap();
    assert_eq!(g.weight(1, 1), 7.0);
    assert_eq!(g.weight(2, 1), 3.0);
    assert!(f.override_cells(&[((1, 1), -1.0)]).is_err());
    assert!(f.override_cells(&[((6, 1), 1.0)]).is_err());
}

#[test]
fn spec_json_round_trip() {
    let spec = EnvironmentSpec::column_log_gamma(0.4, 0.9).with_gamma(3, 0.2).with_window(Window::rect(6, 7));
    assert_eq!(EnvironmentSpec::from_json(&spec.to_json()).unwrap(), spec);
}
