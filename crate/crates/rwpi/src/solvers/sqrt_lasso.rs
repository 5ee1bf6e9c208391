//! Square-root lasso by concomitant alternation.
//!
//! The objective `sqrt(MSE_n(beta)) + lambda ||beta||_p` is minimized by
//! alternating a scale update `sigma = sqrt(MSE_n(beta))` with a penalized
//! least-squares solve at effective penalty `lambda * sigma` (coordinate
//! descent for p = 1, proximal gradient for p = 2). Each alternation is a
//! majorize-minimize step on the true objective, so the recorded objective
//! sequence is nonincreasing.

use nalgebra::{DMatrix, DVector};

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::norms::Exponent;
use crate::solvers::{
    objective_value, penalized_kkt_residual, require_penalty_exponent, FitCaps, FitResult,
};

/// Interpolation threshold: below this mean squared error the square root
/// is treated as exactly zero and the fit stops.
const INTERPOLATION_MSE: f64 = 1e-14;

pub fn fit_sqrt_lasso(
    ds: &Dataset,
    lambda: f64,
    p: Exponent,
    tol: f64,
    caps: FitCaps,
) -> Result<FitResult> {
    fit_sqrt_lasso_traced(ds, lambda, p, tol, caps).map(|(fit, _)| fit)
}

/// Same fit, also returning the outer objective trace (one value per
/// concomitant update, nonincreasing up to numerical slack).
pub fn fit_sqrt_lasso_traced(
    ds: &Dataset,
    lambda: f64,
    p: Exponent,
    tol: f64,
    caps: FitCaps,
) -> Result<(FitResult, Vec<f64>)> {
    ds.require_kind(TaskKind::Regression)?;
    require_penalty_exponent(p)?;
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidPenalty { got: lambda });
    }
    if ds.n() == 0 {
        return Err(Error::EmptyInput { what: "sqrt-lasso dataset" });
    }
    let n = ds.n() as f64;
    let x = ds.x();
    let y = ds.y();
    let col_sq: Vec<f64> = (0..ds.d()).map(|j| x.column(j).norm_squared() / n).collect();
    let lipschitz = power_iteration_lipschitz(x) / n;

    let mut beta = DVector::zeros(ds.d());
    let mut trace = Vec::new();
    let mut objective = objective_value(ds, &beta, lambda, p, true);
    trace.push(objective);
    let mut passes_used = 0usize;
    let mut iterations = 0usize;
    let mut converged = false;
    let mut kkt = f64::INFINITY;

    for _outer in 0..caps.outer {
        iterations += 1;
        let mse = ds.mse(&beta);
        if mse < INTERPOLATION_MSE {
            // Interpolating fit: objective reduces to the penalty alone.
            let fit = FitResult {
                objective: lambda * crate::norms::lp_norm_unchecked(beta.as_slice(), p),
                beta,
                kkt_residual: 0.0,
                iterations,
                converged: true,
                lambda,
                warning: None,
            };
            return Ok((fit, trace));
        }
        let sigma = mse.sqrt();
        let effective = lambda * sigma;
        let inner_tol = (tol * sigma * 0.5).max(1e-15);
        let budget = caps.coordinate_passes.saturating_sub(passes_used);
        if budget == 0 {
            break;
        }
        let used = match p {
            Exponent::Finite(1.0) => {
                coordinate_descent(x, y, &col_sq, effective, inner_tol, budget, &mut beta)
            }
            _ => proximal_gradient(x, y, lipschitz, effective, p, inner_tol, budget.min(caps.prox_steps), &mut beta),
        };
        passes_used += used;

        let new_objective = objective_value(ds, &beta, lambda, p, true);
        kkt = sqrt_lasso_kkt(ds, &beta, lambda, p);
        let decrease = objective - new_objective;
        objective = new_objective;
        trace.push(objective);
        if decrease.abs() < tol && kkt < tol {
            converged = true;
            break;
        }
    }
    let fit = FitResult {
        objective,
        kkt_residual: kkt,
        iterations,
        converged,
        lambda,
        warning: None,
        beta,
    };
    Ok((fit, trace))
}

/// Optimality residual of the square-root objective itself.
fn sqrt_lasso_kkt(ds: &Dataset, beta: &DVector<f64>, lambda: f64, p: Exponent) -> f64 {
    let mse = ds.mse(beta);
    if mse < INTERPOLATION_MSE {
        return 0.0;
    }
    let n = ds.n() as f64;
    let resid = ds.y() - ds.x() * beta;
    let grad = ds.x().transpose() * resid * (-1.0 / (n * mse.sqrt()));
    penalized_kkt_residual(&grad, beta, lambda, p)
}

/// Cyclic coordinate descent on `(1/2n)||y - X b||^2 + effective ||b||_1`.
/// Returns the number of passes consumed.
fn coordinate_descent(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    col_sq: &[f64],
    effective: f64,
    tol: f64,
    max_passes: usize,
    beta: &mut DVector<f64>,
) -> usize {
    let n = y.len() as f64;
    let mut resid = y - x * &*beta;
    for pass in 0..max_passes {
        let mut max_change: f64 = 0.0;
        for j in 0..beta.len() {
            if col_sq[j] == 0.0 {
                continue;
            }
            let old = beta[j];
            let z = x.column(j).dot(&resid) / n + col_sq[j] * old;
            let new = soft_threshold(z, effective) / col_sq[j];
            if new != old {
                resid.axpy(old - new, &x.column(j).clone_owned(), 1.0);
                beta[j] = new;
                max_change = max_change.max((new - old).abs() * col_sq[j].sqrt());
            }
        }
        if max_change < tol * 0.1 {
            // Confirm with the exact inner stationarity residual.
            let grad = x.transpose() * &resid * (-1.0 / n);
            if penalized_kkt_residual(&grad, beta, effective, Exponent::one()) < tol {
                return pass + 1;
            }
        }
    }
    max_passes
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// ISTA on `(1/2n)||y - X b||^2 + effective ||b||_p` for the p = 2 penalty
/// (and as the generic fallback). Returns steps consumed.
#[allow(clippy::too_many_arguments)]
fn proximal_gradient(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    lipschitz: f64,
    effective: f64,
    p: Exponent,
    tol: f64,
    max_steps: usize,
    beta: &mut DVector<f64>,
) -> usize {
    let n = y.len() as f64;
    let step = 1.0 / lipschitz.max(1e-300);
    for it in 0..max_steps {
        let resid = y - x * &*beta;
        let grad = x.transpose() * &resid * (-1.0 / n);
        if penalized_kkt_residual(&grad, beta, effective, p) < tol {
            return it + 1;
        }
        let candidate = &*beta - &grad * step;
        *beta = prox_norm(&candidate, effective * step, p);
    }
    max_steps
}

fn prox_norm(v: &DVector<f64>, t: f64, p: Exponent) -> DVector<f64> {
    match p {
        Exponent::Finite(1.0) => v.map(|z| soft_threshold(z, t)),
        _ => {
            // Block soft threshold for the Euclidean penalty.
            let norm = v.norm();
            if norm <= t {
                DVector::zeros(v.len())
            } else {
                v * (1.0 - t / norm)
            }
        }
    }
}

fn power_iteration_lipschitz(x: &DMatrix<f64>) -> f64 {
    let d = x.ncols();
    if d == 0 {
        return 1.0;
    }
    let mut v = DVector::from_element(d, 1.0 / (d as f64).sqrt());
    let mut value = 1.0;
    for _ in 0..100 {
        let w = x.transpose() * (x * &v);
        let norm = w.norm();
        if norm == 0.0 {
            return 1.0;
        }
        value = norm;
        v = w / norm;
    }
    value
}
