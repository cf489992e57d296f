//! Centering, covariance and the least-squares residual operators.
//!
//! Every operator here assumes its inputs are already centered: covariances
//! are plain inner products divided by `n - 1`, with no mean subtraction. This
//! keeps the operators linear, which is also what lets the same code run on
//! population mixing coefficients (see [`crate::evaluation::oracle`]).

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Stable identifier of an observed variable. Survives subsetting.
pub type VariableId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("data matrix needs at least 2 variables, got {0}")]
    TooFewVariables(usize),
    #[error("data matrix needs at least 3 samples, got {0}")]
    TooFewSamples(usize),
    #[error("row {row} has {got} samples, expected {expected}")]
    RaggedRows { row: usize, got: usize, expected: usize },
    #[error("non-finite value at variable {row}, sample {col}")]
    NonFinite { row: usize, col: usize },
    #[error("expected {expected} variable ids, got {got}")]
    IdCountMismatch { expected: usize, got: usize },
    #[error("duplicate variable id {0}")]
    DuplicateId(VariableId),
    #[error("vectors have different lengths ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("regressor variance {0:e} is below the degeneracy threshold")]
    DegenerateVariance(f64),
    #[error("regressor covariance is singular (condition number {0:e})")]
    SingularCovariance(f64),
    #[error("{samples} samples cannot support {regressors} regressors")]
    Underdetermined { samples: usize, regressors: usize },
}

/// Observations of `d` variables (rows) over `n` samples (columns).
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    rows: Vec<Vec<f64>>,
    ids: Vec<VariableId>,
}

impl DataMatrix {
    pub fn new(rows: Vec<Vec<f64>>, ids: Vec<VariableId>) -> Result<Self, StatsError> {
        let d = rows.len();
        if d < 2 {
            return Err(StatsError::TooFewVariables(d));
        }
        if ids.len() != d {
            return Err(StatsError::IdCountMismatch { expected: d, got: ids.len() });
        }
        let n = rows[0].len();
        if n < 3 {
            return Err(StatsError::TooFewSamples(n));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(StatsError::RaggedRows { row: r, got: row.len(), expected: n });
            }
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(StatsError::NonFinite { row: r, col: c });
            }
        }
        let mut seen = ids.clone();
        seen.sort_unstable();
        if let Some(w) = seen.windows(2).find(|w| w[0] == w[1]) {
            return Err(StatsError::DuplicateId(w[0]));
        }
        Ok(Self { rows, ids })
    }

    /// Variables numbered `0..d` in row order.
    pub fn with_default_ids(rows: Vec<Vec<f64>>) -> Result<Self, StatsError> {
        let ids = (0..rows.len()).collect();
        Self::new(rows, ids)
    }

    pub fn n_vars(&self) -> usize {
        self.rows.len()
    }

    pub fn n_samples(&self) -> usize {
        self.rows[0].len()
    }

    pub fn ids(&self) -> &[VariableId] {
        &self.ids
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn row(&self, pos: usize) -> &[f64] {
        &self.rows[pos]
    }

    pub fn position(&self, id: VariableId) -> Option<usize> {
        self.ids.iter().position(|&v| v == id)
    }

    pub fn row_by_id(&self, id: VariableId) -> Option<&[f64]> {
        self.position(id).map(|p| self.rows[p].as_slice())
    }

    /// Restricts to the given row positions, keeping their ids.
    pub fn select(&self, positions: &[usize]) -> Result<Self, StatsError> {
        let rows = positions.iter().map(|&p| self.rows[p].clone()).collect();
        let ids = positions.iter().map(|&p| self.ids[p]).collect();
        Self::new(rows, ids)
    }

    pub fn into_rows(self) -> Vec<Vec<f64>> {
        self.rows
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Subtracts the sample mean in place.
pub fn center_in_place(x: &mut [f64]) {
    let m = mean(x);
    x.iter_mut().for_each(|v| *v -= m);
}

/// Returns a copy of `x` with every row shifted to zero sample mean.
pub fn center(x: &DataMatrix) -> DataMatrix {
    let mut out = x.clone();
    out.rows.iter_mut().for_each(|r| center_in_place(r));
    out
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Unbiased sample covariance of two centered vectors.
pub fn covariance(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / (a.len() as f64 - 1.0)
}

/// Unbiased sample variance of a centered vector.
pub fn variance(a: &[f64]) -> f64 {
    covariance(a, a)
}

/// Least-squares regression on centered data, with the degeneracy gates used
/// throughout discovery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LeastSquares {
    /// Regressors with variance at or below this are treated as constant.
    pub degenerate_variance: f64,
    /// Largest accepted condition number of the regressor covariance.
    pub max_condition: f64,
}

impl Default for LeastSquares {
    fn default() -> Self {
        Self { degenerate_variance: 1e-12, max_condition: 1e12 }
    }
}

impl LeastSquares {
    /// Residual of `xi` after regressing it on the single regressor `xj`:
    /// `xi - cov(xi, xj) / var(xj) * xj`.
    pub fn simple_residual(&self, xi: &[f64], xj: &[f64]) -> Result<Vec<f64>, StatsError> {
        if xi.len() != xj.len() {
            return Err(StatsError::LengthMismatch(xi.len(), xj.len()));
        }
        let var_j = variance(xj);
        if var_j <= self.degenerate_variance {
            return Err(StatsError::DegenerateVariance(var_j));
        }
        let coef = covariance(xi, xj) / var_j;
        Ok(xi.iter().zip(xj).map(|(a, b)| a - coef * b).collect())
    }

    /// Coefficients of the multiple regression of `y` on `regressors`, solved
    /// through a QR factorization of the design matrix.
    pub fn coefficients<R: AsRef<[f64]>>(
        &self,
        y: &[f64],
        regressors: &[R],
    ) -> Result<Vec<f64>, StatsError> {
        let n = y.len();
        let p = regressors.len();
        if p == 0 {
            return Ok(Vec::new());
        }
        if n <= p {
            return Err(StatsError::Underdetermined { samples: n, regressors: p });
        }
        for r in regressors {
            let r = r.as_ref();
            if r.len() != n {
                return Err(StatsError::LengthMismatch(n, r.len()));
            }
            let v = variance(r);
            if v <= self.degenerate_variance {
                return Err(StatsError::DegenerateVariance(v));
            }
        }
        let design = DMatrix::from_fn(n, p, |i, k| regressors[k].as_ref()[i]);
        let qr = design.qr();
        let r = qr.r();
        // cond(X^T X) = cond(R)^2
        let sv = r.singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
        if !(condition <= self.max_condition) {
            return Err(StatsError::SingularCovariance(condition));
        }
        let qty = qr.q().transpose() * DVector::from_column_slice(y);
        let beta = r
            .solve_upper_triangular(&qty)
            .ok_or(StatsError::SingularCovariance(condition))?;
        Ok(beta.iter().copied().collect())
    }

    /// Residual of `y` after multiple regression on `regressors`.
    pub fn multiple_residual<R: AsRef<[f64]>>(
        &self,
        y: &[f64],
        regressors: &[R],
    ) -> Result<Vec<f64>, StatsError> {
        let beta = self.coefficients(y, regressors)?;
        let mut out = y.to_vec();
        for (b, r) in beta.iter().zip(regressors) {
            out.iter_mut().zip(r.as_ref()).for_each(|(o, x)| *o -= b * x);
        }
        Ok(out)
    }
}

/// [`LeastSquares::simple_residual`] with default thresholds.
pub fn simple_residual(xi: &[f64], xj: &[f64]) -> Result<Vec<f64>, StatsError> {
    LeastSquares::default().simple_residual(xi, xj)
}

/// [`LeastSquares::multiple_residual`] with default thresholds.
pub fn multiple_residual<R: AsRef<[f64]>>(
    xj: &[f64],
    rest: &[R],
) -> Result<Vec<f64>, StatsError> {
    LeastSquares::default().multiple_residual(xj, rest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn corr(a: &[f64], b: &[f64]) -> f64 {
        covariance(a, b) / (variance(a) * variance(b)).sqrt()
    }

    #[test]
    fn center_examples() {
        let x = DataMatrix::with_default_ids(vec![
            vec![1.0, 2.0, 3.0],
            vec![5.0, 5.0, 5.0],
        ])
        .unwrap();
        let c = center(&x);
        assert_eq!(c.row(0), &[-1.0, 0.0, 1.0]);
        assert_eq!(c.row(1), &[0.0, 0.0, 0.0]);
        assert_eq!(center(&c), c);
    }

    #[test]
    fn data_matrix_validation() {
        assert_eq!(
            DataMatrix::with_default_ids(vec![vec![1.0, 2.0, 3.0]]),
            Err(StatsError::TooFewVariables(1))
        );
        assert_eq!(
            DataMatrix::with_default_ids(vec![vec![1.0, 2.0], vec![1.0, 2.0]]),
            Err(StatsError::TooFewSamples(2))
        );
        assert!(matches!(
            DataMatrix::with_default_ids(vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0]]),
            Err(StatsError::RaggedRows { row: 1, .. })
        ));
        assert!(matches!(
            DataMatrix::with_default_ids(vec![vec![1.0, f64::NAN, 3.0], vec![1.0, 2.0, 3.0]]),
            Err(StatsError::NonFinite { row: 0, col: 1 })
        ));
        assert_eq!(
            DataMatrix::new(vec![vec![0.0; 3], vec![0.0; 3]], vec![4, 4]),
            Err(StatsError::DuplicateId(4))
        );
    }

    #[test]
    fn subsetting_keeps_ids() {
        let x = DataMatrix::new(vec![vec![1.0; 3], vec![2.0; 3], vec![3.0; 3]], vec![7, 8, 9])
            .unwrap();
        let s = x.select(&[2, 0]).unwrap();
        assert_eq!(s.ids(), &[9, 7]);
        assert_eq!(s.row_by_id(7).unwrap(), &[1.0; 3]);
    }

    #[test]
    fn simple_residual_identical_is_zero() {
        let x = [1.0, -1.0, 2.0, -2.0];
        let r = simple_residual(&x, &x).unwrap();
        r.iter().for_each(|v| assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-15));
    }

    #[test]
    fn simple_residual_uncorrelated_is_identity() {
        let xj = [1.0, -1.0, 1.0, -1.0];
        let xi = [1.0, 1.0, -1.0, -1.0];
        assert_eq!(simple_residual(&xi, &xj).unwrap(), xi.to_vec());
    }

    #[test]
    fn simple_residual_four_sample_instance() {
        // v is centered and orthogonal to xj, so the normal equation
        // (xj.xj) b = xj.xi gives b = 2 exactly and the residual is v.
        let xj = [1.0, -1.0, 2.0, -2.0];
        let v = [1.0, 1.0, -1.0, -1.0];
        let xi: Vec<f64> = xj.iter().zip(&v).map(|(a, b)| 2.0 * a + b).collect();
        let b = dot(&xj, &xi) / dot(&xj, &xj);
        assert_abs_diff_eq!(b, 2.0, epsilon = 1e-15);
        let r = simple_residual(&xi, &xj).unwrap();
        for (a, e) in r.iter().zip(&v) {
            assert_abs_diff_eq!(*a, *e, epsilon = 1e-14);
        }
    }

    #[test]
    fn simple_residual_degenerate() {
        let r = simple_residual(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]);
        assert!(matches!(r, Err(StatsError::DegenerateVariance(_))));
    }

    #[test]
    fn multiple_residual_in_span_is_zero() {
        let a = [1.0, -2.0, 0.5, 0.5, 0.0];
        let b = [0.3, 0.1, -0.2, -0.4, 0.2];
        let r = multiple_residual(&a, &[&b[..], &a[..]]).unwrap();
        r.iter().for_each(|v| assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12));
    }

    #[test]
    fn multiple_residual_zero_projection() {
        let y = [1.0, 1.0, -1.0, -1.0];
        let a = [1.0, -1.0, 1.0, -1.0];
        let b = [1.0, -1.0, -1.0, 1.0];
        let r = multiple_residual(&y, &[a, b]).unwrap();
        for (u, v) in r.iter().zip(&y) {
            assert_abs_diff_eq!(*u, *v, epsilon = 1e-14);
        }
    }

    #[test]
    fn multiple_residual_collinear_is_singular() {
        let y = [1.0, 0.0, -1.0, 0.5];
        let a = [1.0, -1.0, 0.5, -0.5];
        let b: Vec<f64> = a.iter().map(|v| 3.0 * v).collect();
        let r = multiple_residual(&y, &[a.to_vec(), b]);
        assert!(matches!(r, Err(StatsError::SingularCovariance(_))));
    }

    /// Normal-equation solve, used as an independent route to the QR solve.
    fn normal_equation_coefficients(y: &[f64], xs: &[Vec<f64>]) -> Vec<f64> {
        let p = xs.len();
        let gram = DMatrix::from_fn(p, p, |i, j| dot(&xs[i], &xs[j]));
        let rhs = DVector::from_fn(p, |i, _| dot(&xs[i], y));
        gram.lu().solve(&rhs).unwrap().iter().copied().collect()
    }

    #[test]
    fn chain_residual_matches_normal_equations() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let n = 200;
        let mut u = || -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
        let (e1, e2, e3) = (u(), u(), u());
        let mut x1 = e1;
        let mut x2: Vec<f64> = x1.iter().zip(&e2).map(|(a, e)| 0.8 * a + e).collect();
        let mut x3: Vec<f64> = x2.iter().zip(&e3).map(|(a, e)| -1.2 * a + e).collect();
        for v in [&mut x1, &mut x2, &mut x3] {
            center_in_place(v);
        }
        let regs = vec![x1.clone(), x2.clone()];
        let beta_qr = LeastSquares::default().coefficients(&x3, &regs).unwrap();
        let beta_ne = normal_equation_coefficients(&x3, &regs);
        for (a, b) in beta_qr.iter().zip(&beta_ne) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
        let r = multiple_residual(&x3, &regs).unwrap();
        assert!(corr(&r, &x1).abs() <= 1e-8);
        assert!(corr(&r, &x2).abs() <= 1e-8);
    }

    fn centered_vec(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, n).prop_map(|mut v| {
            center_in_place(&mut v);
            v
        })
    }

    proptest! {
        #[test]
        fn simple_residual_is_orthogonal(xi in centered_vec(30), xj in centered_vec(30)) {
            prop_assume!(variance(&xj) > 1e-6);
            let r = simple_residual(&xi, &xj).unwrap();
            let bound = 1e-8 * variance(&xj).sqrt() * variance(&r).sqrt().max(1e-12);
            prop_assert!(covariance(&r, &xj).abs() <= bound.max(1e-12));
        }

        #[test]
        fn simple_residual_is_linear(
            xi in centered_vec(20), yi in centered_vec(20), xj in centered_vec(20),
            a in -3.0f64..3.0, b in -3.0f64..3.0,
        ) {
            prop_assume!(variance(&xj) > 1e-6);
            let combo: Vec<f64> = xi.iter().zip(&yi).map(|(u, v)| a * u + b * v).collect();
            let lhs = simple_residual(&combo, &xj).unwrap();
            let rx = simple_residual(&xi, &xj).unwrap();
            let ry = simple_residual(&yi, &xj).unwrap();
            for k in 0..lhs.len() {
                prop_assert!((lhs[k] - (a * rx[k] + b * ry[k])).abs() <= 1e-10);
            }
        }

        #[test]
        fn simple_residual_regressor_scale_free(
            xi in centered_vec(20), xj in centered_vec(20), c in prop_oneof![-5.0f64..-0.2, 0.2f64..5.0],
        ) {
            prop_assume!(variance(&xj) > 1e-6);
            let scaled: Vec<f64> = xj.iter().map(|v| c * v).collect();
            let a = simple_residual(&xi, &xj).unwrap();
            let b = simple_residual(&xi, &scaled).unwrap();
            for k in 0..a.len() {
                prop_assert!((a[k] - b[k]).abs() <= 1e-10);
            }
        }

        #[test]
        fn multiple_residual_is_orthogonal(
            y in centered_vec(40), a in centered_vec(40), b in centered_vec(40), c in centered_vec(40),
        ) {
            let regs = vec![a, b, c];
            if let Ok(r) = multiple_residual(&y, &regs) {
                for reg in &regs {
                    let bound = 1e-8 * variance(reg).sqrt() * variance(&r).sqrt();
                    prop_assert!(covariance(&r, reg).abs() <= bound.max(1e-12));
                }
            }
        }
    }
}
