//! Estimating equations: a moment function `h(w, theta)` with its derivative
//! in `w`, carried as callable values with declared dimensions.

use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

use crate::error::{Error, Result};

pub type HFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DVector<f64> + Send + Sync>;
pub type DhFn = Arc<dyn Fn(&DVector<f64>, &DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// Moment condition `E[h(W, theta)] = 0` with `W` in R^m, `theta` in R^l,
/// and h taking values in R^r. `dh` is the derivative of h in its first
/// argument, an r-by-m matrix.
#[derive(Clone)]
pub struct EstimatingEquation {
    h: HFn,
    dh: DhFn,
    pub m: usize,
    pub l: usize,
    pub r: usize,
}

impl std::fmt::Debug for EstimatingEquation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("EstimatingEquation")
            .field("m", &self.m)
            .field("l", &self.l)
            .field("r", &self.r)
            .finish()
    }
}

impl EstimatingEquation {
    pub fn new(h: HFn, dh: DhFn, m: usize, l: usize, r: usize) -> Self {
        EstimatingEquation { h, dh, m, l, r }
    }

    pub fn h(&self, w: &DVector<f64>, theta: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_args(w, theta)?;
        let out = (self.h)(w, theta);
        if out.len() != self.r {
            return Err(Error::DimensionMismatch {
                what: "h output",
                expected: self.r,
                got: out.len(),
            });
        }
        Ok(out)
    }

    pub fn dh(&self, w: &DVector<f64>, theta: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_args(w, theta)?;
        let out = (self.dh)(w, theta);
        if out.nrows() != self.r || out.ncols() != self.m {
            return Err(Error::DimensionMismatch {
                what: "dh output rows*cols",
                expected: self.r * self.m,
                got: out.nrows() * out.ncols(),
            });
        }
        Ok(out)
    }

    fn check_args(&self, w: &DVector<f64>, theta: &DVector<f64>) -> Result<()> {
        if w.len() != self.m {
            return Err(Error::DimensionMismatch {
                what: "w",
                expected: self.m,
                got: w.len(),
            });
        }
        if theta.len() != self.l {
            return Err(Error::DimensionMismatch {
                what: "theta",
                expected: self.l,
                got: theta.len(),
            });
        }
        Ok(())
    }

    /// Largest relative discrepancy between `dh` and a central finite
    /// difference of `h` at the given point.
    pub fn derivative_residual(&self, w: &DVector<f64>, theta: &DVector<f64>) -> Result<f64> {
        let step = 1e-5;
        let analytic = self.dh(w, theta)?;
        let mut worst: f64 = 0.0;
        for j in 0..self.m {
            let mut wp = w.clone();
            let mut wm = w.clone();
            wp[j] += step;
            wm[j] -= step;
            let diff = (self.h(&wp, theta)? - self.h(&wm, theta)?) / (2.0 * step);
            for i in 0..self.r {
                let denom = 1.0 + analytic[(i, j)].abs();
                worst = worst.max((diff[i] - analytic[(i, j)]).abs() / denom);
            }
        }
        Ok(worst)
    }
}

/// `h(w, theta) = w - theta`: estimating a mean in R^m (m = l = r).
pub fn mean_equation(dim: usize) -> EstimatingEquation {
    EstimatingEquation::new(
        Arc::new(|w: &DVector<f64>, theta: &DVector<f64>| w - theta),
        Arc::new(move |_w: &DVector<f64>, _theta: &DVector<f64>| DMatrix::identity(dim, dim)),
        dim,
        dim,
        dim,
    )
}

/// `h((x, y), beta) = (y - beta^T x) x`: the square-loss optimality
/// condition. `W = (x, y)` lives in R^{d+1} with the response last.
pub fn linear_regression_equation(d: usize) -> EstimatingEquation {
    let h: HFn = Arc::new(move |w: &DVector<f64>, beta: &DVector<f64>| {
        let x = w.rows(0, d);
        let y = w[d];
        let resid = y - beta.dot(&x.clone_owned());
        let mut out = DVector::zeros(d);
        for i in 0..d {
            out[i] = resid * x[i];
        }
        out
    });
    let dh: DhFn = Arc::new(move |w: &DVector<f64>, beta: &DVector<f64>| {
        // d/dx [(y - beta^T x) x] = (y - beta^T x) I - x beta^T; d/dy = x.
        let x = w.rows(0, d).clone_owned();
        let y = w[d];
        let resid = y - beta.dot(&x);
        let mut out = DMatrix::zeros(d, d + 1);
        for i in 0..d {
            out[(i, i)] += resid;
            for j in 0..d {
                out[(i, j)] -= x[i] * beta[j];
            }
            out[(i, d)] = x[i];
        }
        out
    });
    EstimatingEquation::new(h, dh, d + 1, d, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_equation_shapes_and_values() {
        let eq = mean_equation(2);
        let w = DVector::from_vec(vec![3.0, 1.0]);
        let theta = DVector::from_vec(vec![1.0, 1.0]);
        assert_eq!(eq.h(&w, &theta).unwrap(), DVector::from_vec(vec![2.0, 0.0]));
        assert!(eq.derivative_residual(&w, &theta).unwrap() < 1e-9);
    }

    #[test]
    fn linear_regression_derivative_matches_finite_difference() {
        let eq = linear_regression_equation(3);
        let w = DVector::from_vec(vec![0.3, -1.0, 2.0, 0.7]);
        let beta = DVector::from_vec(vec![1.0, 0.5, -0.2]);
        assert!(eq.derivative_residual(&w, &beta).unwrap() < 1e-5);
    }

    #[test]
    fn dimension_errors() {
        let eq = mean_equation(2);
        let w = DVector::from_vec(vec![1.0]);
        let theta = DVector::from_vec(vec![0.0, 0.0]);
        assert!(eq.h(&w, &theta).is_err());
    }
}
