//! Centered Gaussian sampling from a covariance factorization.
//!
//! Dense covariances are factored once through a symmetric eigendecomposition
//! (eigenvalues below 1e-12 are treated as zero, so nearly singular plug-in
//! estimates never produce NaNs); the AR(1) family is sampled through its
//! banded-root recursion without materializing the matrix.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Eigenvalues smaller than this are zeroed before taking square roots.
pub const EIGENVALUE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
enum Root {
    /// Dense root L with covariance L L^T.
    Dense(DMatrix<f64>),
    /// AR(1) with lag-one correlation phi and unit marginal variance.
    Ar1 { dim: usize, phi: f64 },
}

/// A covariance matrix held in sample-ready (root) form.
#[derive(Debug, Clone)]
pub struct CovFactor {
    root: Root,
    id: u64,
}

impl CovFactor {
    /// Factors a symmetric covariance matrix.
    pub fn from_covariance(cov: &DMatrix<f64>) -> Result<Self> {
        if cov.nrows() != cov.ncols() {
            return Err(Error::DimensionMismatch {
                what: "covariance must be square",
                expected: cov.nrows(),
                got: cov.ncols(),
            });
        }
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "covariance entries" });
        }
        let sym = cov.clone().symmetric_eigen();
        let d = cov.nrows();
        let mut root = DMatrix::zeros(d, d);
        for j in 0..d {
            let ev = sym.eigenvalues[j];
            let s = if ev < EIGENVALUE_FLOOR { 0.0 } else { ev.sqrt() };
            for i in 0..d {
                root[(i, j)] = sym.eigenvectors[(i, j)] * s;
            }
        }
        let id = digest(root.as_slice());
        Ok(CovFactor {
            root: Root::Dense(root),
            id,
        })
    }

    /// Identity covariance in dimension `dim`.
    pub fn identity(dim: usize) -> Self {
        CovFactor {
            root: Root::Dense(DMatrix::identity(dim, dim)),
            id: digest(&[dim as f64]),
        }
    }

    /// AR(1) covariance `Sigma_{kj} = phi^{|k-j|}` with unit variances.
    pub fn ar1(dim: usize, phi: f64) -> Result<Self> {
        if phi.is_nan() || phi.abs() >= 1.0 {
            return Err(Error::Config {
                what: format!("AR(1) correlation must satisfy |phi| < 1, got {phi}"),
            });
        }
        Ok(CovFactor {
            root: Root::Ar1 { dim, phi },
            id: digest(&[dim as f64, phi]),
        })
    }

    pub fn dim(&self) -> usize {
        match &self.root {
            Root::Dense(l) => l.nrows(),
            Root::Ar1 { dim, .. } => *dim,
        }
    }

    /// A stable identifier for reproducibility metadata.
    pub fn id(&self) -> u64 {
        self.id
    }

    /// One draw from N(0, Sigma).
    pub fn sample<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        match &self.root {
            Root::Dense(l) => {
                let z = DVector::from_fn(l.ncols(), |_, _| rng.sample(StandardNormal));
                l * z
            }
            Root::Ar1 { dim, phi } => {
                let mut out = DVector::zeros(*dim);
                let innovation = (1.0 - phi * phi).sqrt();
                let mut prev = 0.0;
                for k in 0..*dim {
                    let z: f64 = rng.sample(StandardNormal);
                    let v = if k == 0 { z } else { phi * prev + innovation * z };
                    out[k] = v;
                    prev = v;
                }
                out
            }
        }
    }
}

fn digest(values: &[f64]) -> u64 {
    // FNV-1a over the raw float bytes; for bookkeeping, not cryptography.
    let mut h = 0xcbf2_9ce4_8422_2325u64;
    for v in values {
        for b in v.to_bits().to_le_bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Centered sample covariance of the rows of `x` (divisor n).
pub fn sample_covariance(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    if n == 0 {
        return Err(Error::EmptyInput { what: "covariance of zero rows" });
    }
    let mean = x.row_mean();
    let mut cov = DMatrix::zeros(x.ncols(), x.ncols());
    for i in 0..n {
        let c = x.row(i) - &mean;
        cov.syger(1.0 / n as f64, &c.transpose(), &c.transpose(), 1.0);
    }
    fill_upper_from_lower(&mut cov);
    Ok(cov)
}

/// Uncentered second moment `(1/n) sum_i x_i x_i^T` of the rows of `x`.
pub fn second_moment(x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = x.nrows();
    if n == 0 {
        return Err(Error::EmptyInput { what: "second moment of zero rows" });
    }
    let mut m = DMatrix::zeros(x.ncols(), x.ncols());
    for i in 0..n {
        let r = x.row(i).transpose();
        m.syger(1.0 / n as f64, &r, &r, 1.0);
    }
    fill_upper_from_lower(&mut m);
    Ok(m)
}

fn fill_upper_from_lower(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        for j in (i + 1)..m.ncols() {
            m[(i, j)] = m[(j, i)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngSeed;

    #[test]
    fn ar1_recursion_matches_toeplitz_covariance() {
        let seed = RngSeed::new(11);
        let f = CovFactor::ar1(4, 0.5).unwrap();
        let draws = 200_000;
        let mut acc = DMatrix::zeros(4, 4);
        let mut rng = seed.stream(0);
        for _ in 0..draws {
            let z = f.sample(&mut rng);
            acc.syger(1.0 / draws as f64, &z, &z, 1.0);
        }
        fill_upper_from_lower(&mut acc);
        for i in 0..4 {
            for j in 0..4 {
                let want = 0.5f64.powi((i as i32 - j as i32).abs());
                assert!(
                    (acc[(i, j)] - want).abs() < 0.02,
                    "entry ({i},{j}): {} vs {want}",
                    acc[(i, j)]
                );
            }
        }
    }

    #[test]
    fn dense_factor_reproduces_covariance() {
        let cov = DMatrix::from_row_slice(2, 2, &[2.0, 0.6, 0.6, 1.0]);
        let f = CovFactor::from_covariance(&cov).unwrap();
        let mut rng = RngSeed::new(3).stream(0);
        let draws = 200_000;
        let mut acc = DMatrix::zeros(2, 2);
        for _ in 0..draws {
            let z = f.sample(&mut rng);
            acc.syger(1.0 / draws as f64, &z, &z, 1.0);
        }
        fill_upper_from_lower(&mut acc);
        assert!((acc[(0, 0)] - 2.0).abs() < 0.03);
        assert!((acc[(0, 1)] - 0.6).abs() < 0.02);
    }

    #[test]
    fn zero_covariance_yields_zero_draws() {
        let cov = DMatrix::zeros(3, 3);
        let f = CovFactor::from_covariance(&cov).unwrap();
        let mut rng = RngSeed::new(5).stream(1);
        let z = f.sample(&mut rng);
        assert_eq!(z, DVector::zeros(3));
    }

    #[test]
    fn sample_covariance_centered() {
        let x = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let cov = sample_covariance(&x).unwrap();
        // population variance with divisor n = 3: 2/3
        assert!((cov[(0, 0)] - 2.0 / 3.0).abs() < 1e-12);
        let m = second_moment(&x).unwrap();
        assert!((m[(0, 0)] - 14.0 / 3.0).abs() < 1e-12);
    }
}
