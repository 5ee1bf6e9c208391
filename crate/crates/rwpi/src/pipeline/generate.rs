//! Synthetic sparse linear model: `Y = 3 X_1 + 2 X_2 + 1.5 X_4 + e` with
//! AR(0.5) Gaussian predictors and independent N(0, sigma^2) errors.

use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::gaussian::CovFactor;
use crate::rng::RngSeed;

/// The nonzero coefficients sit at (1-based) positions 1, 2 and 4.
pub fn sparse_ground_truth(d: usize) -> DVector<f64> {
    let mut beta = DVector::zeros(d);
    beta[0] = 3.0;
    beta[1] = 2.0;
    beta[3] = 1.5;
    beta
}

pub fn generate_linear_data(
    n: usize,
    d: usize,
    sigma: f64,
    seed: RngSeed,
) -> Result<(Dataset, DVector<f64>)> {
    if d < 4 {
        return Err(Error::Config {
            what: format!("the sparse model needs d >= 4, got {d}"),
        });
    }
    if n == 0 {
        return Err(Error::Config { what: "n must be positive".into() });
    }
    if sigma.is_nan() || sigma < 0.0 {
        return Err(Error::Config {
            what: format!("sigma must be nonnegative, got {sigma}"),
        });
    }
    let beta = sparse_ground_truth(d);
    let ar1 = CovFactor::ar1(d, 0.5)?;
    let mut x_rng = seed.stream(0);
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        let row = ar1.sample(&mut x_rng);
        x.row_mut(i).copy_from(&row.transpose());
    }
    let mut e_rng = seed.stream(1);
    let y = DVector::from_fn(n, |i, _| {
        let z: f64 = StandardNormal.sample(&mut e_rng);
        x.row(i).transpose().dot(&beta) + sigma * z
    });
    let ds = Dataset::new(x, y, TaskKind::Regression)?;
    Ok((ds, beta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ground_truth_layout() {
        let beta = sparse_ground_truth(6);
        assert_eq!(beta.as_slice(), &[3.0, 2.0, 0.0, 1.5, 0.0, 0.0]);
    }

    #[test]
    fn needs_four_predictors() {
        assert!(generate_linear_data(10, 3, 1.0, RngSeed::new(0)).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let (a, _) = generate_linear_data(50, 5, 10.0, RngSeed::new(42)).unwrap();
        let (b, _) = generate_linear_data(50, 5, 10.0, RngSeed::new(42)).unwrap();
        assert_eq!(a.x(), b.x());
        assert_eq!(a.y(), b.y());
    }

    #[test]
    fn neighbor_correlation_near_half() {
        let (ds, _) = generate_linear_data(100_000, 5, 1.0, RngSeed::new(3)).unwrap();
        let x = ds.x();
        let n = ds.n() as f64;
        let c01 = x.column(0).dot(&x.column(1).clone_owned()) / n;
        assert!((c01 - 0.5).abs() < 0.02, "cov(1,2) = {c01}");
        let c03 = x.column(0).dot(&x.column(3).clone_owned()) / n;
        assert!((c03 - 0.125).abs() < 0.02, "cov(1,4) = {c03}");
    }

    #[test]
    fn noiseless_data_lies_on_the_plane() {
        let (ds, beta) = generate_linear_data(20, 4, 0.0, RngSeed::new(9)).unwrap();
        assert!(ds.mse(&beta) < 1e-24);
    }
}
