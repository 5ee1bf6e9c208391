//! Exact profile evaluation for linear regression with squared l2
//! response-preserving cost.
//!
//! The dual is `sup_lambda -(1/n) sum_i sup_x' { lambda^T h(x', Y_i) -
//! c(x', X_i) }` with `h(x, y) = (y - beta^T x) x` and squared Euclidean
//! cost on the predictors. The inner supremum is an explicit quadratic: with
//! `M(lambda) = I + (beta lambda^T + lambda beta^T)/2` and
//! `b_i = Y_i lambda + 2 X_i` it equals `b_i^T M^{-1} b_i / 4 - ||X_i||^2`,
//! finite exactly when M is positive definite. M is identity plus a rank-two
//! symmetric update, so its smallest eigenvalue is
//! `1 + (beta^T lambda - ||beta|| ||lambda||)/2` and M^{-1} b is a
//! Woodbury solve with a 2x2 core.

use nalgebra::{DVector, Matrix2, Vector2};

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::profile::{ProfileMethod, RwpValue};

/// Strict positive-definiteness margin on the smallest eigenvalue of M.
const FEASIBILITY_MARGIN: f64 = 1e-9;
const MAX_ITERATIONS: usize = 5_000;
const ARMIJO: f64 = 1e-4;

/// Smallest eigenvalue of `M(lambda)` minus zero; feasible region is where
/// this exceeds the margin.
fn smallest_eigenvalue(beta: &DVector<f64>, lambda: &DVector<f64>) -> f64 {
    1.0 + (beta.dot(lambda) - beta.norm() * lambda.norm()) / 2.0
}

/// Objective and gradient of the dual at a feasible `lambda`; `None` when
/// `lambda` is outside the positive-definite region.
fn dual_objective_grad(
    ds: &Dataset,
    beta: &DVector<f64>,
    lambda: &DVector<f64>,
) -> Option<(f64, DVector<f64>)> {
    if smallest_eigenvalue(beta, lambda) < FEASIBILITY_MARGIN {
        return None;
    }
    let n = ds.n();
    let d = ds.d();
    // Woodbury core C = A^{-1} + U^T U for U = [beta lambda], A = [[0,.5],[.5,0]].
    let bb = beta.norm_squared();
    let bl = beta.dot(lambda);
    let ll = lambda.norm_squared();
    let core = Matrix2::new(bb, bl + 2.0, bl + 2.0, ll);
    let inv = core.try_inverse()?;
    let mut value = 0.0;
    let mut grad = DVector::zeros(d);
    for i in 0..n {
        let xi = ds.x().row(i).transpose();
        let yi = ds.y()[i];
        let b = lambda * yi + &xi * 2.0;
        // u = M^{-1} b = b - U inv (U^T b)
        let utb = Vector2::new(beta.dot(&b), lambda.dot(&b));
        let coef = inv * utb;
        let u = &b - (beta * coef[0] + lambda * coef[1]);
        let inner = b.dot(&u) / 4.0 - xi.norm_squared();
        value -= inner / n as f64;
        // Envelope gradient: the inner maximizer is x' = u/2 and
        // d(inner)/d lambda = (Y_i - beta^T x') x'.
        let xprime = u / 2.0;
        let resid = yi - beta.dot(&xprime);
        grad.axpy(-resid / n as f64, &xprime, 1.0);
    }
    Some((value, grad))
}

/// Dual objective at an externally supplied `lambda`; `None` if infeasible.
/// Useful for lower-bound checks: any feasible point is dominated by the
/// maximized value.
pub fn rwp_linear_q2_dual_objective(
    ds: &Dataset,
    beta: &DVector<f64>,
    lambda: &DVector<f64>,
) -> Result<Option<f64>> {
    validate(ds, beta)?;
    Ok(dual_objective_grad(ds, beta, lambda).map(|(v, _)| v))
}

fn validate(ds: &Dataset, beta: &DVector<f64>) -> Result<()> {
    ds.require_kind(TaskKind::Regression)?;
    if beta.len() != ds.d() {
        return Err(Error::DimensionMismatch {
            what: "beta",
            expected: ds.d(),
            got: beta.len(),
        });
    }
    if beta.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "beta" });
    }
    Ok(())
}

/// Profile value for the square-loss estimating equation
/// `E[(Y - beta^T X) X] = 0` under cost `N_2((x,y),(u,v))^2`, by projected
/// gradient ascent on the concave dual, stopping when the gradient norm is
/// at most `tol`.
pub fn rwp_linear_q2(ds: &Dataset, beta: &DVector<f64>, tol: f64) -> Result<RwpValue> {
    validate(ds, beta)?;
    if ds.n() == 0 {
        return Err(Error::EmptyInput { what: "rwp_linear_q2 dataset" });
    }
    let mut lambda = DVector::zeros(ds.d());
    let (mut value, mut grad) =
        dual_objective_grad(ds, beta, &lambda).expect("lambda = 0 is always feasible");
    let mut step = 1.0;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        let gnorm = grad.norm();
        if gnorm <= tol {
            converged = true;
            break;
        }
        // Backtracking line search from a Barzilai-Borwein spectral step;
        // shrinking the step also restores feasibility because the region
        // is star-shaped around 0 and we only leave it by stepping too far.
        let mut accepted = false;
        let mut t = step;
        while t > 1e-18 {
            let candidate = &lambda + &grad * t;
            if let Some((cv, cg)) = dual_objective_grad(ds, beta, &candidate) {
                if cv >= value + ARMIJO * t * gnorm * gnorm {
                    let dlam = &candidate - &lambda;
                    let dgrad = &cg - &grad;
                    let curvature = -dlam.dot(&dgrad);
                    step = if curvature > 0.0 {
                        (dlam.norm_squared() / curvature).clamp(1e-12, 1e8)
                    } else {
                        (t * 2.0).min(1e6)
                    };
                    lambda = candidate;
                    value = cv;
                    grad = cg;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            // No ascent step exists at this scale; treat as converged if the
            // gradient is already small, otherwise report non-convergence.
            converged = grad.norm() <= tol;
            break;
        }
    }
    if iterations >= MAX_ITERATIONS && grad.norm() <= tol {
        converged = true;
    }
    Ok(RwpValue {
        value: value.max(0.0),
        dual_point: lambda,
        iterations,
        converged,
        method: ProfileMethod::LinearQ2Dual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Dataset;
    use nalgebra::{DMatrix, DVector};

    fn ds(rows: &[(f64, f64)]) -> Dataset {
        let x = DMatrix::from_column_slice(rows.len(), 1, &rows.iter().map(|r| r.0).collect::<Vec<_>>());
        let y = DVector::from_vec(rows.iter().map(|r| r.1).collect());
        Dataset::new(x, y, TaskKind::Regression).unwrap()
    }

    #[test]
    fn zero_when_estimating_equation_holds() {
        // Single sample (x=1, y=2), beta=2: (y - beta x) x = 0 already.
        let d = ds(&[(1.0, 2.0)]);
        let r = rwp_linear_q2(&d, &DVector::from_vec(vec![2.0]), 1e-10).unwrap();
        assert!(r.value.abs() < 1e-12);
        assert!(r.converged);
    }

    #[test]
    fn single_point_transport_cost() {
        // (x=1, y=1), beta=0: cheapest fix moves x to 0 at cost 1.
        let d = ds(&[(1.0, 1.0)]);
        let r = rwp_linear_q2(&d, &DVector::from_vec(vec![0.0]), 1e-10).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "value {}", r.value);
    }

    #[test]
    fn zero_at_the_least_squares_solution() {
        let d = ds(&[(1.0, 0.7), (2.0, 1.9), (-1.0, -1.2), (0.5, 0.6)]);
        // OLS through the origin: beta = sum xy / sum x^2.
        let bhat = d
            .x()
            .column(0)
            .iter()
            .zip(d.y().iter())
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / d.x().column(0).norm_squared();
        let r = rwp_linear_q2(&d, &DVector::from_vec(vec![bhat]), 1e-10).unwrap();
        assert!(r.value < 1e-14);
    }

    #[test]
    fn invariant_under_row_permutation() {
        let a = ds(&[(0.3, 1.0), (1.4, -0.2), (-0.8, 0.5), (2.0, 2.5)]);
        let b = ds(&[(2.0, 2.5), (-0.8, 0.5), (0.3, 1.0), (1.4, -0.2)]);
        let beta = DVector::from_vec(vec![0.4]);
        let va = rwp_linear_q2(&a, &beta, 1e-10).unwrap().value;
        let vb = rwp_linear_q2(&b, &beta, 1e-10).unwrap().value;
        assert!((va - vb).abs() < 1e-10);
    }

    #[test]
    fn kind_mismatch_rejected() {
        let x = DMatrix::from_element(2, 1, 1.0);
        let y = DVector::from_vec(vec![1.0, -1.0]);
        let d = Dataset::new(x, y, TaskKind::Binary).unwrap();
        assert!(matches!(
            rwp_linear_q2(&d, &DVector::from_vec(vec![0.0]), 1e-8),
            Err(Error::KindMismatch { .. })
        ));
    }

    #[test]
    fn externally_supplied_dual_points_are_dominated() {
        let d = ds(&[(0.3, 1.0), (1.4, -0.2), (-0.8, 0.5), (2.0, 2.5), (0.9, 0.9)]);
        let beta = DVector::from_vec(vec![0.8]);
        let best = rwp_linear_q2(&d, &beta, 1e-10).unwrap();
        for probe in [-1.5, -0.4, 0.2, 0.9, 2.0] {
            let lam = DVector::from_vec(vec![probe]);
            if let Some(obj) = rwp_linear_q2_dual_objective(&d, &beta, &lam).unwrap() {
                assert!(obj <= best.value + 1e-8, "probe {probe}: {obj} vs {}", best.value);
            }
        }
    }
}
