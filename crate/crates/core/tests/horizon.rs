use hskpz::horizon::{self, HorizonGrid};
use hskpz::verify::{mean, variance};
use hskpz::SeededSource;

#[test]
fn burke_increments_have_the_stationary_rate() {
    let beta = 0.25;
    let mut all = Vec::new();
    for r in 0..4000 {
        all.extend(horizon::burke_sampler(beta, 20, &SeededSource::new(6, r)).unwrap());
    }
    let m = mean(&all);
    let target = 1.0 / (0.5 - beta);
    assert!((m - target).abs() < 5.0 * target / (all.len() as f64).sqrt(), "{m}");
    assert!((variance(&all) / (target * target) - 1.0).abs() < 0.05);
    assert!(horizon::burke_sampler(0.5, 3, &SeededSource::new(1, 1)).is_err());
}

#[test]
fn zplus_is_reflected() {
    let z = horizon::sample_zplus(0.8, 0.3, (-4, 6), &SeededSource::new(3, 0)).unwrap();
    assert_eq!(z.eval(0), Some(0.0));
    assert!(horizon::sample_zplus(0.1, 0.3, (0, 1), &SeededSource::new(3, 0)).is_err());
}

#[test]
fn horizon_marginals_are_pinned_and_ordered() {
    let grid = HorizonGrid::new(2.0, 0.01).unwrap();
    for seed in 0..20 {
        let h = horizon::sample_horizon_marginals(-0.5, &[2.0, 1.0, 0.5], grid, &SeededSource::new(seed, 0)).unwrap();
        assert_eq!(h.processes.len(), 3);
        for i in 0..3 {
            assert!(h.value(i, 0.0).unwrap().abs() < 1e-12);
        }
        assert!(h.increments_ordered(1e-9), "seed {seed}");
    }
}

#[test]
fn horizon_slope_asymptotics_at_moderate_range() {
    let grid = HorizonGrid::new(20.0, 0.02).unwrap();
    let vals: Vec<f64> = (0..400)
        .map(|r| {
            let h = horizon::sample_horizon_marginals(0.0, &[1.0], grid, &SeededSource::new(77, r)).unwrap();
            h.value(0, 20.0).unwrap() / 20.0
        })
        .collect();
    assert!((mean(&vals) - 1.0).abs() < 0.15, "{}", mean(&vals));
}
