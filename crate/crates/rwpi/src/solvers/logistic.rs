//! Penalized logistic regression by accelerated proximal gradient with
//! backtracking.

use nalgebra::{DMatrix, DVector};

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::norms::Exponent;
use crate::solvers::{
    objective_value, penalized_kkt_residual, require_penalty_exponent, FitCaps, FitResult,
    FitWarning,
};
use crate::worstcase::log_exp_loss;

fn loss_and_grad(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> (f64, DVector<f64>) {
    let n = y.len() as f64;
    let margins = x * beta;
    let mut loss = 0.0;
    let mut weights = DVector::zeros(y.len());
    for i in 0..y.len() {
        let m = y[i] * margins[i];
        loss += log_exp_loss(m);
        // d/d margin of log(1+exp(-m)) = -sigmoid(-m).
        weights[i] = -y[i] * sigmoid(-m);
    }
    (loss / n, x.transpose() * weights / n)
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

fn prox(v: &DVector<f64>, t: f64, p: Exponent) -> DVector<f64> {
    match p {
        Exponent::Finite(1.0) => v.map(|z| {
            if z > t {
                z - t
            } else if z < -t {
                z + t
            } else {
                0.0
            }
        }),
        _ => {
            let norm = v.norm();
            if norm <= t {
                DVector::zeros(v.len())
            } else {
                v * (1.0 - t / norm)
            }
        }
    }
}

pub fn fit_logistic_lp(
    ds: &Dataset,
    lambda: f64,
    p: Exponent,
    tol: f64,
    caps: FitCaps,
) -> Result<FitResult> {
    fit_logistic_lp_traced(ds, lambda, p, tol, caps).map(|(fit, _)| fit)
}

/// Same fit, also returning the per-step objective trace. The monotone
/// variant of the accelerated scheme is used, so the trace never rises.
pub fn fit_logistic_lp_traced(
    ds: &Dataset,
    lambda: f64,
    p: Exponent,
    tol: f64,
    caps: FitCaps,
) -> Result<(FitResult, Vec<f64>)> {
    ds.require_kind(TaskKind::Binary)?;
    require_penalty_exponent(p)?;
    if lambda.is_nan() || lambda < 0.0 {
        return Err(Error::InvalidPenalty { got: lambda });
    }
    if ds.n() == 0 {
        return Err(Error::EmptyInput { what: "logistic dataset" });
    }
    let x = ds.x();
    let y = ds.y();
    let d = ds.d();

    let mut beta = DVector::zeros(d);
    let mut momentum = beta.clone();
    let mut theta = 1.0f64;
    // The logistic Hessian is bounded by X^T X / (4n).
    let mut lipschitz = (x.norm_squared() / (4.0 * ds.n() as f64)).max(1e-12);
    let mut kkt = f64::INFINITY;
    let mut iterations = 0usize;
    let mut converged = false;
    let mut objective = objective_value(ds, &beta, lambda, p, false);
    let mut trace = vec![objective];

    for _ in 0..caps.prox_steps {
        iterations += 1;
        let (_, grad_beta) = loss_and_grad(x, y, &beta);
        kkt = penalized_kkt_residual(&grad_beta, &beta, lambda, p);
        if kkt <= tol {
            converged = true;
            break;
        }
        let (lv, lg) = loss_and_grad(x, y, &momentum);
        // Backtracking on the local Lipschitz constant.
        let mut candidate;
        loop {
            let step = 1.0 / lipschitz;
            candidate = prox(&(&momentum - &lg * step), lambda * step, p);
            let diff = &candidate - &momentum;
            let (nv, _) = loss_and_grad(x, y, &candidate);
            if nv <= lv + lg.dot(&diff) + 0.5 * lipschitz * diff.norm_squared() + 1e-15 {
                break;
            }
            lipschitz *= 2.0;
            if lipschitz > 1e18 {
                break;
            }
        }
        // Monotone acceleration: keep the incumbent when the proximal
        // candidate fails to improve, but still feed the candidate into
        // the momentum sequence.
        let candidate_objective = objective_value(ds, &candidate, lambda, p, false);
        let prev = beta.clone();
        if candidate_objective <= objective {
            beta = candidate.clone();
            objective = candidate_objective;
        }
        trace.push(objective);
        let theta_next = 0.5 * (1.0 + (1.0 + 4.0 * theta * theta).sqrt());
        momentum = &beta
            + (&candidate - &beta) * (theta / theta_next)
            + (&beta - &prev) * ((theta - 1.0) / theta_next);
        theta = theta_next;
    }

    let warning = if !converged && lambda == 0.0 && separable(x, y, &beta) {
        Some(FitWarning::Separable)
    } else {
        None
    };
    let fit = FitResult {
        objective,
        kkt_residual: kkt,
        iterations,
        converged,
        lambda,
        warning,
        beta,
    };
    Ok((fit, trace))
}

/// All margins strictly positive: the current direction separates the data.
fn separable(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> bool {
    if beta.amax() == 0.0 {
        return false;
    }
    let margins = x * beta;
    margins.iter().zip(y.iter()).all(|(m, yi)| yi * m > 0.0)
}
