//! Ordinary least squares through a Householder QR factorization.

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::solvers::FitResult;

pub fn fit_ols(ds: &Dataset) -> Result<FitResult> {
    ds.require_kind(TaskKind::Regression)?;
    let n = ds.n();
    let d = ds.d();
    if n < d {
        return Err(Error::RankError {
            what: format!("n = {n} rows cannot determine d = {d} coefficients"),
        });
    }
    let qr = ds.x().clone().qr();
    let r = qr.r();
    let diag_max = (0..d).map(|j| r[(j, j)].abs()).fold(0.0f64, f64::max);
    if d > 0 && (0..d).any(|j| r[(j, j)].abs() <= 1e-10 * diag_max.max(1e-300)) {
        return Err(Error::RankError {
            what: "predictor matrix is rank deficient".into(),
        });
    }
    let qty = qr.q().transpose() * ds.y();
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankError {
            what: "triangular solve failed".into(),
        })?;
    let resid = ds.y() - ds.x() * &beta;
    let kkt = (ds.x().transpose() * &resid).amax() / n as f64;
    Ok(FitResult {
        objective: ds.mse(&beta),
        kkt_residual: kkt,
        iterations: 1,
        converged: true,
        lambda: 0.0,
        warning: None,
        beta,
    })
}
