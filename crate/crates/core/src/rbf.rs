//! Wendland C² kernel and local RBF interpolation.
//!
//! A local interpolant is `R(x) = Σ_k c_k φ(‖x − x_k‖)` with coefficients
//! fixed by requiring `R(x_i) = f_i` at every center. The interpolation
//! matrix is symmetric positive definite for distinct centers in up to three
//! dimensions, so it is solved by a dense Cholesky factorization.

use log::warn;

use crate::error::{Error, Result};
use crate::geometry::{distance, PointSet};

/// Centers closer than this are treated as the same point.
pub const DUPLICATE_DISTANCE: f64 = 1e-14;

/// `(1 − t)⁴ (4t + 1)` for `t < 1`, zero beyond.
#[inline]
pub fn wendland_profile(t: f64) -> f64 {
    if t < 1.0 {
        let s = 1.0 - t;
        let s2 = s * s;
        s2 * s2 * (4.0 * t + 1.0)
    } else {
        0.0
    }
}

/// `φ(r) = (1 − δr)⁴₊ (4δr + 1)`, supported on `[0, 1/δ]`.
pub fn wendland_c2(r: f64, shape: f64) -> Result<f64> {
    if !(r >= 0.0) {
        return Err(Error::NegativeDistance(r));
    }
    Ok(wendland_profile(shape * r))
}

/// Wendland C² kernel with shape parameter `δ > 0`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Kernel {
    shape: f64,
}

impl Kernel {
    pub fn new(shape: f64) -> Result<Self> {
        if !(shape > 0.0 && shape.is_finite()) {
            return Err(Error::Config(format!("kernel shape parameter must be positive, got {shape}")));
        }
        Ok(Self { shape })
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    pub fn support_radius(&self) -> f64 {
        1.0 / self.shape
    }

    #[inline]
    pub fn eval(&self, r: f64) -> f64 {
        wendland_profile(self.shape * r)
    }
}

/// Dense symmetric matrix, stored in full row-major order.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Self { n, data }
    }

    /// Builds from row-major data, checking squareness and exact symmetry.
    pub fn from_rows(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::LengthMismatch {
                left: data.len(),
                right: n * n,
            });
        }
        for i in 0..n {
            for j in 0..i {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::Config(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .chunks_exact(self.n)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Interpolation matrix `Φ_ik = φ(‖x_i − x_k‖)`. Each pair is evaluated once
/// and mirrored.
pub fn kernel_matrix(pts: &PointSet, kernel: &Kernel) -> Result<SymMatrix> {
    let n = pts.len();
    if n == 0 {
        return Err(Error::Empty("kernel matrix needs at least one point"));
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        data[i * n + i] = kernel.eval(0.0);
        let pi = pts.get(i);
        for k in 0..i {
            let r = distance(pi, pts.get(k));
            if r < DUPLICATE_DISTANCE {
                return Err(Error::DuplicatePoints(k, i));
            }
            let v = kernel.eval(r);
            data[i * n + k] = v;
            data[k * n + i] = v;
        }
    }
    Ok(SymMatrix { n, data })
}

/// Lower-triangular Cholesky factor `L` with `A + jitter·I = L Lᵀ`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    lower: Vec<f64>,
}

impl Cholesky {
    pub fn factor(matrix: &SymMatrix, jitter: f64) -> Result<Self> {
        let n = matrix.n();
        let mut lower = vec![0.0; n * n];
        for j in 0..n {
            let row_j = j * n;
            let mut diag = matrix.get(j, j) + jitter;
            for k in 0..j {
                diag -= lower[row_j + k] * lower[row_j + k];
            }
            if !(diag > 0.0) || !diag.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            let pivot = diag.sqrt();
            lower[row_j + j] = pivot;
            for i in j + 1..n {
                let row_i = i * n;
                let mut v = matrix.get(i, j);
                for k in 0..j {
                    v -= lower[row_i + k] * lower[row_j + k];
                }
                lower[row_i + j] = v / pivot;
            }
        }
        Ok(Self { n, lower })
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = rhs.to_vec();
        for i in 0..n {
            let row = &self.lower[i * n..i * n + i];
            let s: f64 = row.iter().zip(&y[..i]).map(|(l, v)| l * v).sum();
            y[i] = (y[i] - s) / self.lower[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in i + 1..n {
                s -= self.lower[k * n + i] * y[k];
            }
            y[i] = s / self.lower[i * n + i];
        }
        y
    }
}

/// Solves `Φ c = f` by Cholesky factorization.
pub fn solve_coefficients(matrix: &SymMatrix, values: &[f64]) -> Result<Vec<f64>> {
    solve_coefficients_with_jitter(matrix, values, 0.0)
}

/// Like [`solve_coefficients`] but factors `Φ + jitter·I`. A nonzero jitter
/// turns interpolation into approximation and is reported through the log.
pub fn solve_coefficients_with_jitter(matrix: &SymMatrix, values: &[f64], jitter: f64) -> Result<Vec<f64>> {
    if values.len() != matrix.n() {
        return Err(Error::LengthMismatch {
            left: matrix.n(),
            right: values.len(),
        });
    }
    if !(jitter >= 0.0) {
        return Err(Error::Config(format!("diagonal jitter must be nonnegative, got {jitter}")));
    }
    if jitter > 0.0 {
        warn!("solving with diagonal jitter {jitter:e}: local fits no longer interpolate their data");
    }
    let factor = Cholesky::factor(matrix, jitter)?;
    Ok(factor.solve(values))
}

/// `‖Φc − f‖∞`.
pub fn residual_max(matrix: &SymMatrix, coefficients: &[f64], values: &[f64]) -> f64 {
    matrix
        .mul_vec(coefficients)
        .iter()
        .zip(values)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// A solved local interpolant.
#[derive(Clone, Debug)]
pub struct LocalInterpolant {
    centers: PointSet,
    coefficients: Vec<f64>,
    kernel: Kernel,
}

impl LocalInterpolant {
    pub fn fit(centers: PointSet, values: &[f64], kernel: Kernel) -> Result<Self> {
        Self::fit_with_jitter(centers, values, kernel, 0.0)
    }

    pub fn fit_with_jitter(centers: PointSet, values: &[f64], kernel: Kernel, jitter: f64) -> Result<Self> {
        let matrix = kernel_matrix(&centers, &kernel)?;
        let coefficients = solve_coefficients_with_jitter(&matrix, values, jitter)?;
        Ok(Self {
            centers,
            coefficients,
            kernel,
        })
    }

    pub fn centers(&self) -> &PointSet {
        &self.centers
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.centers.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.centers.dim(),
                found: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64]) -> f64 {
        self.centers
            .iter()
            .zip(&self.coefficients)
            .map(|(c, &coef)| coef * self.kernel.eval(distance(x, c)))
            .sum()
    }
}

/// Evaluates `interp` at `x`.
pub fn eval_local(interp: &LocalInterpolant, x: &[f64]) -> Result<f64> {
    interp.eval(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::halton::halton_points;
    use proptest::prelude::*;

    #[test]
    fn wendland_values() {
        for shape in [0.1, 1.0, 3.0] {
            assert_eq!(wendland_c2(0.0, shape).unwrap(), 1.0);
            assert_eq!(wendland_c2(1.0 / shape, shape).unwrap(), 0.0);
            assert_eq!(wendland_c2(2.0 / shape, shape).unwrap(), 0.0);
        }
        assert!((wendland_c2(5.0, 0.1).unwrap() - 0.1875).abs() < 1e-15);
        assert!(matches!(wendland_c2(-1.0, 1.0), Err(Error::NegativeDistance(_))));
    }

    #[test]
    fn wendland_is_nonincreasing() {
        for shape in [0.1, 1.0, 3.0] {
            let support = 1.0 / shape;
            let mut prev = f64::INFINITY;
            for i in 0..10_000 {
                let r = 1.2 * support * i as f64 / 9_999.0;
                let v = wendland_c2(r, shape).unwrap();
                assert!(v <= prev, "shape {shape} r {r}");
                prev = v;
            }
        }
    }

    #[test]
    fn kernel_rejects_bad_shape() {
        assert!(Kernel::new(0.0).is_err());
        assert!(Kernel::new(-1.0).is_err());
        assert!(Kernel::new(f64::NAN).is_err());
    }

    #[test]
    fn kernel_matrix_examples() {
        let k = Kernel::new(0.1).unwrap();
        let m = kernel_matrix(&PointSet::from_rows(&[[0.3, 0.3]]).unwrap(), &k).unwrap();
        assert_eq!(m, SymMatrix::identity(1));

        let far = PointSet::from_rows(&[[0.0, 0.0], [10.0, 0.0]]).unwrap();
        assert_eq!(kernel_matrix(&far, &k).unwrap(), SymMatrix::identity(2));

        let five = PointSet::from_rows(&[[0.0, 0.0], [3.0, 4.0]]).unwrap();
        let m = kernel_matrix(&five, &k).unwrap();
        assert!((m.get(0, 1) - 0.1875).abs() < 1e-15);
        assert_eq!(m.get(0, 1), m.get(1, 0));
    }

    #[test]
    fn kernel_matrix_reports_duplicates() {
        let pts = PointSet::from_rows(&[[0.1, 0.2], [0.5, 0.5], [0.1, 0.2]]).unwrap();
        let err = kernel_matrix(&pts, &Kernel::new(1.0).unwrap()).unwrap_err();
        assert!(matches!(err, Error::DuplicatePoints(0, 2)));
    }

    #[test]
    fn kernel_matrix_is_symmetric_with_unit_diagonal() {
        let pts = halton_points(60, 3).unwrap();
        let m = kernel_matrix(&pts, &Kernel::new(2.0).unwrap()).unwrap();
        for i in 0..60 {
            assert_eq!(m.get(i, i), 1.0);
            for k in 0..60 {
                assert_eq!(m.get(i, k), m.get(k, i));
                assert!((0.0..=1.0).contains(&m.get(i, k)));
            }
        }
    }

    #[test]
    fn solve_examples() {
        let c = solve_coefficients(&SymMatrix::identity(2), &[2.0, -1.0]).unwrap();
        assert_eq!(c, vec![2.0, -1.0]);
        let c = solve_coefficients(&SymMatrix::identity(1), &[7.0]).unwrap();
        assert_eq!(c, vec![7.0]);
    }

    #[test]
    fn solve_reports_failing_pivot() {
        let m = SymMatrix::from_rows(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        assert!(matches!(
            solve_coefficients(&m, &[1.0, 1.0]),
            Err(Error::NotPositiveDefinite { pivot: 1 })
        ));
        assert!(solve_coefficients(&m, &[1.0]).is_err());
    }

    #[test]
    fn jitter_rescues_singular_system() {
        let m = SymMatrix::from_rows(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(solve_coefficients(&m, &[1.0, 1.0]).is_err());
        let c = solve_coefficients_with_jitter(&m, &[1.0, 1.0], 1e-8).unwrap();
        assert!(residual_max(&m, &c, &[1.0, 1.0]) < 1e-7);
    }

    #[test]
    fn flat_kernel_residual_on_halton_cluster() {
        // Points inside a small ball with δ = 0.1: a nearly flat, badly
        // conditioned system like the ones met in practice.
        let kernel = Kernel::new(0.1).unwrap();
        for dim in [2, 3] {
            let raw = halton_points(4000, dim).unwrap();
            let center = vec![0.5; dim];
            let radius = if dim == 2 { 0.1 } else { 0.118 };
            let mut local = PointSet::with_capacity(dim, 256);
            for p in raw.iter() {
                if distance(p, &center) <= radius {
                    local.push(p).unwrap();
                }
            }
            let values: Vec<f64> = local.iter().map(|p| (3.0 * p[0]).sin() + p[1] * p[1]).collect();
            let m = kernel_matrix(&local, &kernel).unwrap();
            let c = solve_coefficients(&m, &values).unwrap();
            let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
            assert!(residual_max(&m, &c, &values) <= 1e-10 * scale, "dim {dim}");
        }
    }

    #[test]
    fn interpolant_reproduces_data() {
        let kernel = Kernel::new(0.1).unwrap();
        let pts = PointSet::from_rows(&[[0.1, 0.1], [0.3, 0.2], [0.2, 0.4], [0.45, 0.35], [0.3, 0.3]]).unwrap();
        let ones = vec![1.0; 5];
        let interp = LocalInterpolant::fit(pts.clone(), &ones, kernel).unwrap();
        for p in pts.iter() {
            assert!((eval_local(&interp, p).unwrap() - 1.0).abs() < 1e-8);
        }
        assert_eq!(interp.eval(&[20.0, 20.0]).unwrap(), 0.0);
        assert!(interp.eval(&[0.1]).is_err());
    }

    proptest! {
        #[test]
        fn permutation_equivariance(seed in 0usize..500, n in 2usize..25, shift in 1usize..24) {
            let kernel = Kernel::new(1.5).unwrap();
            let all = halton_points(seed + n, 2).unwrap();
            let idx: Vec<usize> = (seed..seed + n).collect();
            let pts = all.select(&idx);
            let values: Vec<f64> = pts.iter().map(|p| p[0] - 2.0 * p[1] * p[1]).collect();
            let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
            let permuted_values: Vec<f64> = perm.iter().map(|&i| values[i]).collect();

            let a = LocalInterpolant::fit(pts.clone(), &values, kernel).unwrap();
            let b = LocalInterpolant::fit(pts.select(&perm), &permuted_values, kernel).unwrap();
            for (k, &i) in perm.iter().enumerate() {
                let tol = 1e-9 * a.coefficients()[i].abs().max(1.0);
                prop_assert!((b.coefficients()[k] - a.coefficients()[i]).abs() <= tol);
            }
            for q in halton_points(20, 2).unwrap().iter() {
                prop_assert!((a.eval(q).unwrap() - b.eval(q).unwrap()).abs() <= 1e-12);
            }
        }
    }
}
