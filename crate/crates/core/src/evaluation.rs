//! Franke test functions and error metrics.

use crate::error::{Error, Result};

/// Franke's bivariate test function.
///
/// The second term uses `(9y + 1) / 10` unsquared, as in the benchmark's
/// published form.
pub fn franke2(x: f64, y: f64) -> f64 {
    let (a, b) = (9.0 * x, 9.0 * y);
    0.75 * (-((a - 2.0).powi(2) + (b - 2.0).powi(2)) / 4.0).exp()
        + 0.75 * (-(a + 1.0).powi(2) / 49.0 - (b + 1.0) / 10.0).exp()
        + 0.5 * (-((a - 7.0).powi(2) + (b - 3.0).powi(2)) / 4.0).exp()
        - 0.2 * (-(a - 4.0).powi(2) - (b - 7.0).powi(2)).exp()
}

/// Franke's trivariate test function.
///
/// As in the bivariate case, the second term is linear in `y` and `z`; this
/// is the published form and is kept as is.
pub fn franke3(x: f64, y: f64, z: f64) -> f64 {
    let (a, b, c) = (9.0 * x, 9.0 * y, 9.0 * z);
    0.75 * (-((a - 2.0).powi(2) + (b - 2.0).powi(2) + (c - 2.0).powi(2)) / 4.0).exp()
        + 0.75 * (-(a + 1.0).powi(2) / 49.0 - (b + 1.0) / 10.0 - (c + 1.0) / 10.0).exp()
        + 0.5 * (-((a - 7.0).powi(2) + (b - 3.0).powi(2) + (c - 5.0).powi(2)) / 4.0).exp()
        - 0.2 * (-(a - 4.0).powi(2) - (b - 7.0).powi(2) - (c - 5.0).powi(2)).exp()
}

/// Franke function matching the point's dimension (2 or 3).
pub fn franke(p: &[f64]) -> Result<f64> {
    match *p {
        [x, y] => Ok(franke2(x, y)),
        [x, y, z] => Ok(franke3(x, y, z)),
        _ => Err(Error::UnsupportedDimension {
            dim: p.len(),
            reason: "Franke test functions exist in 2 and 3 dimensions",
        }),
    }
}

fn residuals<'a>(truth: &'a [f64], approx: &'a [f64]) -> Result<impl Iterator<Item = f64> + 'a> {
    if truth.len() != approx.len() {
        return Err(Error::LengthMismatch {
            left: truth.len(),
            right: approx.len(),
        });
    }
    if truth.is_empty() {
        return Err(Error::Empty("error metrics need at least one value"));
    }
    Ok(truth.iter().zip(approx).map(|(t, a)| (t - a).abs()))
}

/// Maximum absolute error.
pub fn mae(truth: &[f64], approx: &[f64]) -> Result<f64> {
    Ok(residuals(truth, approx)?.fold(0.0, f64::max))
}

/// Root mean square error.
pub fn rmse(truth: &[f64], approx: &[f64]) -> Result<f64> {
    let s = truth.len() as f64;
    let sum_sq: f64 = residuals(truth, approx)?.map(|r| r * r).sum();
    Ok((sum_sq / s).sqrt())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ErrorReport {
    pub mae: f64,
    pub rmse: f64,
    /// Number of evaluation points.
    pub s: usize,
}

impl ErrorReport {
    pub fn compute(truth: &[f64], approx: &[f64]) -> Result<Self> {
        Ok(Self {
            mae: mae(truth, approx)?,
            rmse: rmse(truth, approx)?,
            s: truth.len(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{grid_points, GridLayout};
    use crate::halton::halton_points;
    use proptest::prelude::*;

    /// Independent transcription: each term written as coefficient times
    /// `exp` of an explicit exponent.
    fn franke2_oracle(x1: f64, x2: f64) -> f64 {
        let t1 = -((9.0 * x1 - 2.0) * (9.0 * x1 - 2.0) + (9.0 * x2 - 2.0) * (9.0 * x2 - 2.0)) / 4.0;
        let t2 = -((9.0 * x1 + 1.0) * (9.0 * x1 + 1.0)) / 49.0 - (9.0 * x2 + 1.0) / 10.0;
        let t3 = -((9.0 * x1 - 7.0) * (9.0 * x1 - 7.0) + (9.0 * x2 - 3.0) * (9.0 * x2 - 3.0)) / 4.0;
        let t4 = -(9.0 * x1 - 4.0) * (9.0 * x1 - 4.0) - (9.0 * x2 - 7.0) * (9.0 * x2 - 7.0);
        3.0 / 4.0 * t1.exp() + 3.0 / 4.0 * t2.exp() + 1.0 / 2.0 * t3.exp() - 1.0 / 5.0 * t4.exp()
    }

    fn franke3_oracle(x1: f64, x2: f64, x3: f64) -> f64 {
        let sq = |v: f64| v * v;
        let t1 = -(sq(9.0 * x1 - 2.0) + sq(9.0 * x2 - 2.0) + sq(9.0 * x3 - 2.0)) / 4.0;
        let t2 = -sq(9.0 * x1 + 1.0) / 49.0 - (9.0 * x2 + 1.0) / 10.0 - (9.0 * x3 + 1.0) / 10.0;
        let t3 = -(sq(9.0 * x1 - 7.0) + sq(9.0 * x2 - 3.0) + sq(9.0 * x3 - 5.0)) / 4.0;
        let t4 = -sq(9.0 * x1 - 4.0) - sq(9.0 * x2 - 7.0) - sq(9.0 * x3 - 5.0);
        3.0 / 4.0 * t1.exp() + 3.0 / 4.0 * t2.exp() + 1.0 / 2.0 * t3.exp() - 1.0 / 5.0 * t4.exp()
    }

    #[test]
    fn franke2_at_origin() {
        let expected = 0.75 * (-2.0f64).exp()
            + 0.75 * (-1.0f64 / 49.0 - 0.1).exp()
            + 0.5 * (-58.0f64 / 4.0).exp()
            - 0.2 * (-65.0f64).exp();
        assert!((franke2(0.0, 0.0) - expected).abs() < 1e-15);
        assert!((franke2(0.0, 0.0) - 0.7664).abs() < 1e-4);
    }

    #[test]
    fn franke2_fourth_term_peak() {
        let (x, y) = (4.0 / 9.0, 7.0 / 9.0);
        let others = 0.75 * (-(4.0f64 + 25.0) / 4.0).exp()
            + 0.75 * (-25.0f64 / 49.0 - 0.8).exp()
            + 0.5 * (-(9.0f64 + 16.0) / 4.0).exp();
        assert!((franke2(x, y) - (others - 0.2)).abs() < 1e-14);
    }

    #[test]
    fn franke2_grid_range() {
        let grid = grid_points(2, 40, GridLayout::CellCentered).unwrap();
        let max = grid.iter().map(|p| franke2(p[0], p[1])).fold(f64::NEG_INFINITY, f64::max);
        assert!(max > 0.0 && max < 1.3, "{max}");
    }

    #[test]
    fn franke3_special_points() {
        let (x, y, z) = (4.0 / 9.0, 7.0 / 9.0, 5.0 / 9.0);
        let rest = franke3(x, y, z) + 0.2;
        let expected_rest = 0.75 * (-(4.0f64 + 25.0 + 9.0) / 4.0).exp()
            + 0.75 * (-25.0f64 / 49.0 - 0.8 - 0.6).exp()
            + 0.5 * (-(9.0f64 + 16.0 + 0.0) / 4.0).exp();
        assert!((rest - expected_rest).abs() < 1e-14);

        let t = 2.0 / 9.0;
        let others = franke3(t, t, t) - 0.75;
        let expected_others = 0.75 * (-9.0f64 / 49.0 - 0.3 - 0.3).exp()
            + 0.5 * (-(25.0f64 + 1.0 + 9.0) / 4.0).exp()
            - 0.2 * (-(4.0f64 + 25.0 + 9.0)).exp();
        assert!((others - expected_others).abs() < 1e-14);
    }

    #[test]
    fn franke_matches_transcription_on_halton_points() {
        for p in halton_points(1000, 2).unwrap().iter() {
            assert!((franke2(p[0], p[1]) - franke2_oracle(p[0], p[1])).abs() < 1e-14);
        }
        for p in halton_points(1000, 3).unwrap().iter() {
            assert!((franke3(p[0], p[1], p[2]) - franke3_oracle(p[0], p[1], p[2])).abs() < 1e-14);
        }
        assert!(franke(&[0.1, 0.2, 0.3, 0.4]).is_err());
    }

    #[test]
    fn metric_examples() {
        assert_eq!(mae(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(rmse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mae(&[1.0, 2.0], &[1.5, 2.0]).unwrap(), 0.5);
        assert!((rmse(&[0.0, 0.0], &[3.0, 4.0]).unwrap() - 12.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(mae(&[1.0], &[1.0, 2.0]), Err(Error::LengthMismatch { .. })));
        assert!(matches!(rmse(&[], &[]), Err(Error::Empty(_))));
    }

    #[test]
    fn mae_matches_linear_scan() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a: Vec<f64> = (0..100).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let b: Vec<f64> = (0..100).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut best = 0.0;
        for i in 0..100 {
            let r = (a[i] - b[i]).abs();
            if r > best {
                best = r;
            }
        }
        assert_eq!(mae(&a, &b).unwrap(), best);
    }

    proptest! {
        #[test]
        fn metric_properties(
            pairs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 1..60),
        ) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let report = ErrorReport::compute(&a, &b).unwrap();
            prop_assert!(report.rmse <= report.mae * (1.0 + 1e-15));
            prop_assert_eq!(mae(&a, &b).unwrap(), mae(&b, &a).unwrap());
            prop_assert!((rmse(&a, &b).unwrap() - rmse(&b, &a).unwrap()).abs() <= 1e-15 * report.rmse);
            for lambda in [2.0, 10.0] {
                let scaled: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + lambda * (y - x)).collect();
                let m = mae(&a, &scaled).unwrap();
                let r = rmse(&a, &scaled).unwrap();
                prop_assert!((m - lambda * report.mae).abs() <= 1e-12 * (1.0 + m));
                prop_assert!((r - lambda * report.rmse).abs() <= 1e-12 * (1.0 + r));
            }
            prop_assert_eq!(report.mae == 0.0, a == b);
        }
    }
}
