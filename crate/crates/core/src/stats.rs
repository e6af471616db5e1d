//! Statistics kernels shared by the simulation and training probes:
//! quantiles, Pearson correlation, and the coefficient of variation.

use crate::error::{Error, Result};

fn check_finite(name: &'static str, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid(format!("{name} must be non-empty")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid(format!("{name} contains non-finite entries")));
    }
    Ok(())
}

/// Linear-interpolation ("type 7") quantiles of `samples` at the levels `qs`.
///
/// Levels must be sorted ascending and lie strictly inside (0, 1). The output
/// is non-decreasing. Input order does not matter.
pub fn quantiles(samples: &[f64], qs: &[f64]) -> Result<Vec<f64>> {
    check_finite("samples", samples)?;
    check_quantile_levels(qs)?;
    let mut sorted = samples.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite values compare"));
    Ok(qs.iter().map(|&q| quantile_of_sorted(&sorted, q)).collect())
}

pub(crate) fn check_quantile_levels(qs: &[f64]) -> Result<()> {
    if qs.is_empty() {
        return Err(Error::invalid("quantile levels must be non-empty"));
    }
    for pair in qs.windows(2) {
        if !(pair[0] < pair[1]) {
            return Err(Error::invalid("quantile levels must be strictly ascending"));
        }
    }
    if qs.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
        return Err(Error::invalid("quantile levels must lie in (0, 1)"));
    }
    Ok(())
}

/// Type-7 quantile of an already-sorted slice. `h = (n−1)q`, interpolating
/// linearly between the order statistics either side of `h`.
pub(crate) fn quantile_of_sorted(sorted: &[f64], q: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let w = h - lo as f64;
    sorted[lo] + w * (sorted[hi] - sorted[lo])
}

/// Median of a sample (type-7 0.5 quantile).
pub fn median(samples: &[f64]) -> Result<f64> {
    Ok(quantiles(samples, &[0.5])?[0])
}

/// Product-moment correlation between `x` and `y`, clamped into [−1, 1].
///
/// Errors if either input has zero variance (the correlation is undefined);
/// callers decide how to treat that case.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    check_finite("x", x)?;
    check_finite("y", y)?;
    if x.len() != y.len() {
        return Err(Error::ShapeMismatch {
            context: "pearson correlation inputs",
            expected: x.len(),
            got: y.len(),
        });
    }
    if x.len() < 2 {
        return Err(Error::invalid("pearson correlation needs at least 2 points"));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::UndefinedCorrelation("x"));
    }
    if syy == 0.0 {
        return Err(Error::UndefinedCorrelation("y"));
    }
    // sqrt(sxx·syy) rather than sqrt(sxx)·sqrt(syy): for identical inputs the
    // ratio is then exactly 1.
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Coefficient of variation: sample standard deviation (n−1 denominator)
/// divided by the absolute sample mean.
///
/// Errors if the mean is exactly zero.
pub fn coefficient_of_variation(samples: &[f64]) -> Result<f64> {
    check_finite("samples", samples)?;
    if samples.len() < 2 {
        return Err(Error::invalid("coefficient of variation needs at least 2 points"));
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if mean == 0.0 {
        return Err(Error::UndefinedCv);
    }
    let ss = samples.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>();
    let sd = (ss / (n - 1.0)).sqrt();
    Ok(sd / mean.abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn quantile_examples() {
        let v: Vec<f64> = (1..=100).map(|i| i as f64).collect();
        assert_eq!(quantiles(&v, &[0.5]).unwrap()[0], 50.5);
        assert_eq!(quantiles(&[7.0], &[0.1, 0.5, 0.9]).unwrap(), vec![7.0; 3]);
        let small = quantiles(&[3.0, 1.0, 2.0], &[0.001]).unwrap()[0];
        assert_relative_eq!(small, 1.0, epsilon = 0.01);
    }

    #[test]
    fn quantile_errors() {
        assert!(quantiles(&[], &[0.5]).is_err());
        assert!(quantiles(&[1.0], &[0.0]).is_err());
        assert!(quantiles(&[1.0], &[0.5, 0.25]).is_err());
        assert!(quantiles(&[1.0, f64::NAN], &[0.5]).is_err());
    }

    #[test]
    fn pearson_examples() {
        assert_eq!(
            pearson_correlation(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(),
            1.0
        );
        assert_eq!(
            pearson_correlation(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap(),
            -1.0
        );
        assert_relative_eq!(
            pearson_correlation(&[1.0, 2.0, 3.0], &[1.0, 0.0, 1.0]).unwrap(),
            0.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn pearson_identical_inputs_exactly_one() {
        let x = [0.3, 17.25, 2.0e-7, 4.5, 981.125];
        assert_eq!(pearson_correlation(&x, &x).unwrap(), 1.0);
    }

    #[test]
    fn pearson_errors() {
        assert!(matches!(
            pearson_correlation(&[1.0, 1.0], &[1.0, 2.0]),
            Err(Error::UndefinedCorrelation("x"))
        ));
        assert!(matches!(
            pearson_correlation(&[1.0, 2.0], &[3.0, 3.0]),
            Err(Error::UndefinedCorrelation("y"))
        ));
        assert!(pearson_correlation(&[1.0, 2.0], &[1.0]).is_err());
        assert!(pearson_correlation(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn cv_examples() {
        assert_eq!(coefficient_of_variation(&[2.0, 2.0, 2.0, 2.0]).unwrap(), 0.0);
        assert_relative_eq!(
            coefficient_of_variation(&[1.0, 3.0]).unwrap(),
            std::f64::consts::SQRT_2 / 2.0,
            max_relative = 1e-15
        );
        assert_relative_eq!(
            coefficient_of_variation(&[-1.0, -3.0]).unwrap(),
            std::f64::consts::SQRT_2 / 2.0,
            max_relative = 1e-15
        );
        assert!(matches!(
            coefficient_of_variation(&[-1.0, 1.0]),
            Err(Error::UndefinedCv)
        ));
        assert!(coefficient_of_variation(&[1.0]).is_err());
    }

    proptest! {
        #[test]
        fn quantiles_invariant_under_permutation(
            mut v in proptest::collection::vec(-1e6f64..1e6, 1..200),
            rot in 0usize..200,
        ) {
            let qs = [0.025, 0.25, 0.5, 0.75, 0.975];
            let base = quantiles(&v, &qs).unwrap();
            let rot = rot % v.len();
            v.rotate_left(rot);
            v.reverse();
            let permuted = quantiles(&v, &qs).unwrap();
            prop_assert_eq!(base, permuted);
        }

        #[test]
        fn quantile_output_nondecreasing(
            v in proptest::collection::vec(-1e6f64..1e6, 1..200),
        ) {
            let qs = [0.01, 0.2, 0.5, 0.8, 0.99];
            let out = quantiles(&v, &qs).unwrap();
            for w in out.windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
        }

        #[test]
        fn pearson_exact_linear_relations(
            x in proptest::collection::vec(-1e3f64..1e3, 3..50),
            a in prop_oneof![(-100.0f64..-0.01), (0.01f64..100.0)],
            b in -100.0f64..100.0,
        ) {
            // Skip degenerate x (all equal).
            prop_assume!(x.iter().any(|&v| v != x[0]));
            let y: Vec<f64> = x.iter().map(|&v| a * v + b).collect();
            let r = pearson_correlation(&x, &y).unwrap();
            let expected = if a > 0.0 { 1.0 } else { -1.0 };
            prop_assert!((r - expected).abs() < 1e-12, "r = {r}, a = {a}");
        }

        #[test]
        fn cv_scale_invariant(
            v in proptest::collection::vec(0.1f64..1e3, 2..50),
            c in 0.01f64..100.0,
        ) {
            let base = coefficient_of_variation(&v).unwrap();
            let scaled: Vec<f64> = v.iter().map(|&x| c * x).collect();
            let cv = coefficient_of_variation(&scaled).unwrap();
            prop_assert!((base - cv).abs() <= 1e-12 * base.max(1.0));
        }
    }
}
