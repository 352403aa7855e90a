//! The two-line stationary measures `Z±` for half-space exponential LPP and the Burke
//! output theorem.

use crate::env::SeededSource;
use crate::error::{domain, Result};
use crate::lpp::BoundaryFunction;
use crate::rng::tag;

fn y(source: &SeededSource, i: i64, line: u64, rate: f64) -> f64 {
    source.stream(&[tag::AUX, i as u64, line]).exp(rate)
}

fn build(corner: f64, beta: f64, j_min: i64, j_max: i64, source: &SeededSource) -> BoundaryFunction {
    let lower = 0.5 - beta;
    let upper = 0.5 + beta;
    let mut values = vec![0.0; (j_max - j_min + 1) as usize];
    // j < 0: partial sums of the second line
    let mut s = 0.0;
    for j in 1..=(-j_min).max(0) {
        s += y(source, j + 2, 2, upper);
        if -j <= j_max {
            values[(-j - j_min) as usize] = s;
        }
    }
    // j ≥ 0: queue recursion L_m = max(L_{m-1}, P_m) + Y(m,2), L_2 = Y(2,2)
    let mut p = 0.0;
    let mut l = corner;
    for j in 0..=j_max {
        if j > 0 {
            let m = j + 2;
            p += y(source, m, 1, lower);
            l = l.max(p) + y(source, m, 2, upper);
        }
        if j >= j_min {
            values[(j - j_min) as usize] = l - corner;
        }
    }
    BoundaryFunction::new(j_min, values)
}

/// `Z⁺(j)` for `j ∈ [j_min, j_max]` in the half-space model with diagonal `Exp(α)`.
/// `Z⁻(j) = Z⁺(-j)`.
pub fn sample_zplus(alpha: f64, beta: f64, range: (i64, i64), source: &SeededSource) -> Result<BoundaryFunction> {
    let lo = (0.5 - alpha).max(0.0);
    if !(beta > lo && beta < 0.5) {
        return domain(format!("β={beta} must lie in ({lo}, 1/2)"));
    }
    if range.0 > range.1 {
        return domain(format!("empty range {range:?}"));
    }
    let corner = y(source, 2, 2, beta + alpha - 0.5);
    Ok(build(corner, beta, range.0, range.1, source))
}

/// Increments `Z⁺(j) - Z⁺(j-1)`, `j = 1..=n`, with the corner weight replaced by an
/// independent `Exp(2β)`. These are i.i.d. `Exp(1/2 - β)`.
pub fn burke_sampler(beta: f64, n: usize, source: &SeededSource) -> Result<Vec<f64>> {
    if !(beta > 0.0 && beta < 0.5) {
        return domain(format!("β={beta} must lie in (0, 1/2)"));
    }
    let corner = y(source, 2, 2, 2.0 * beta);
    let z = build(corner, beta, 0, n as i64, source);
    Ok(z.values.windows(2).map(|w| w[1] - w[0]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_and_determinism() {
        let s = SeededSource::new(3, 4);
        let z = sample_zplus(0.6, 0.25, (-4, 6), &s).unwrap();
        assert_eq!(z.eval(0), Some(0.0));
        assert_eq!(z, sample_zplus(0.6, 0.25, (-4, 6), &s).unwrap());
        // ranges are consistent restrictions of one realization
        let w = sample_zplus(0.6, 0.25, (-2, 3), &s).unwrap();
        for j in -2..=3 {
            assert_eq!(w.eval(j), z.eval(j));
        }
        assert!(z.values.windows(2).skip(4).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn parameter_range() {
        let s = SeededSource::new(0, 0);
        assert!(sample_zplus(0.2, 0.25, (0, 1), &s).is_err());
        assert!(sample_zplus(0.6, 0.5, (0, 1), &s).is_err());
        assert!(burke_sampler(0.0, 3, &s).is_err());
        assert_eq!(burke_sampler(0.25, 7, &s).unwrap().len(), 7);
    }
}
