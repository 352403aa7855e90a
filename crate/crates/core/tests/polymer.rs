mod common;

use common::{brute_log_partition, brute_passage, rel_close, Lcg};
use hskpz::lpp::{Constraint, PassageQuery};
use hskpz::polymer::{self, TwoLineAlgebra};
use hskpz::{WeightField, Window};

fn inverse_gamma_like(rng: &mut Lcg, n: i64) -> WeightField {
    let vals: Vec<f64> = (0..n * n).map(|_| 0.2 + 2.0 * rng.uniform()).collect();
    WeightField::from_fn(Window::rect(n, n), false, |i, j| vals[((i - 1) * n + j - 1) as usize])
}

fn two_rows(a: &[f64], b: &[f64]) -> WeightField {
    WeightField::from_fn(Window::rect(a.len() as i64, 2), false, |i, j| {
        if j == 1 {
            a[(i - 1) as usize]
        } else {
            b[(i - 1) as usize]
        }
    })
}

#[test]
fn log_partition_matches_enumeration() {
    let mut rng = Lcg(21);
    for _ in 0..80 {
        let f = inverse_gamma_like(&mut rng, 6);
        for c in [
            Constraint::None,
            Constraint::HalfSpace,
            Constraint::DiagonalCondition,
            Constraint::HitShiftedDiagonal(1),
            Constraint::Parallelogram { n: 6, ell: 2.0 / 6f64.powf(2.0 / 3.0) },
        ] {
            let end = if matches!(c, Constraint::HalfSpace) { (6, rng.range(1, 6)) } else { (6, 6) };
            for q in [PassageQuery::new((1, 1), end).with(c), PassageQuery::new((1, 1), end).with(c).exclude_start()] {
                let got = polymer::log_partition(&f, &q).unwrap().log_z;
                assert!(rel_close(got, brute_log_partition(&f, &q), 1e-10), "{q:?}");
            }
        }
    }
}

#[test]
fn trapezoid_partition_sums_the_line() {
    let mut rng = Lcg(22);
    for _ in 0..40 {
        let f = inverse_gamma_like(&mut rng, 8);
        let m = rng.range(1, 4);
        let n = rng.range(m, 8 - m + 1);
        let got = polymer::trapezoid_log_partition(&f, n, m).unwrap().log_z;
        let z: f64 = (0..m)
            .map(|i| brute_log_partition(&f, &PassageQuery::new((1, 1), (n + i, m - i)).with(Constraint::HalfSpace)).exp())
            .sum();
        assert!(rel_close(got, z.ln(), 1e-10));
    }
}

#[test]
fn two_line_value_is_a_two_row_passage() {
    let mut rng = Lcg(23);
    for _ in 0..100 {
        let n = rng.range(1, 10) as usize;
        let a: Vec<f64> = (0..n).map(|_| 0.1 + rng.uniform()).collect();
        let b: Vec<f64> = (0..n).map(|_| 0.1 + rng.uniform()).collect();
        let f = two_rows(&a, &b);
        let x = rng.range(1, n as i64) as usize;
        let y = rng.range(x as i64, n as i64) as usize;
        let q = PassageQuery::new((x as i64, 1), (y as i64, 2));
        let mp = polymer::two_line_partition(&a, &b, x, y, TwoLineAlgebra::MaxPlus);
        assert!(rel_close(mp, brute_passage(&f, &q), 1e-12));
        let sp = polymer::two_line_partition(&a, &b, x, y, TwoLineAlgebra::SumProduct);
        assert!(rel_close(sp, brute_log_partition(&f, &q), 1e-12));
    }
}

#[test]
fn rsk_outputs_satisfy_both_identities_by_enumeration() {
    let mut rng = Lcg(24);
    for algebra in [TwoLineAlgebra::MaxPlus, TwoLineAlgebra::SumProduct] {
        for _ in 0..200 {
            let n = rng.range(1, 12) as usize;
            let a: Vec<f64> = (0..n).map(|_| 0.05 + 3.0 * rng.uniform()).collect();
            let b: Vec<f64> = (0..n).map(|_| 0.05 + 3.0 * rng.uniform()).collect();
            let env = polymer::rsk_two_line(&a, &b, algebra).unwrap();
            let (before, after) = (two_rows(&a, &b), two_rows(&env.a_hat, &env.b_hat));
            let value = |f: &WeightField, q: &PassageQuery| match algebra {
                TwoLineAlgebra::MaxPlus => brute_passage(f, q),
                TwoLineAlgebra::SumProduct => brute_log_partition(f, q),
            };
            let mut first = 0.0;
            for y in 1..=n {
                first = match algebra {
                    TwoLineAlgebra::MaxPlus => first + env.b_hat[y - 1],
                    TwoLineAlgebra::SumProduct => first + env.b_hat[y - 1].ln(),
                };
                let q = PassageQuery::new((1, 1), (y as i64, 2));
                assert!(rel_close(value(&before, &q), first, 1e-10));
            }
            for x in 2..=n {
                for y in x..=n {
                    let q = PassageQuery::new((x as i64, 1), (y as i64, 2));
                    assert!(rel_close(value(&before, &q), value(&after, &q), 1e-10));
                }
            }
            assert!(polymer::verify_isometry(&env, 1e-9).pass);
        }
    }
}

#[test]
fn sum_product_rejects_nonpositive_entries() {
    assert!(polymer::rsk_two_line(&[1.0, 0.0], &[1.0, 1.0], TwoLineAlgebra::SumProduct).is_err());
    assert!(polymer::rsk_two_line(&[1.0], &[1.0, 1.0], TwoLineAlgebra::MaxPlus).is_err());
}
