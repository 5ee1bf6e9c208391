//! Worst-case expected loss over a transport ball around the empirical
//! measure: closed forms for square, logistic and hinge losses, plus a
//! one-dimensional dual minimization that serves as a numerical oracle for
//! the square-loss closed form.

use nalgebra::DVector;

use crate::dataset::{Dataset, TaskKind};
use crate::error::{Error, Result};
use crate::norms::{lp_norm, Exponent};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WorstCaseForm {
    ClosedLinear,
    ClosedLinearBarbeta,
    ClosedLogistic,
    ClosedHinge,
    DualNumeric,
}

impl WorstCaseForm {
    pub fn as_str(&self) -> &'static str {
        match self {
            WorstCaseForm::ClosedLinear => "closed-linear",
            WorstCaseForm::ClosedLinearBarbeta => "closed-linear-barbeta",
            WorstCaseForm::ClosedLogistic => "closed-logistic",
            WorstCaseForm::ClosedHinge => "closed-hinge",
            WorstCaseForm::DualNumeric => "dual-numeric",
        }
    }
}

#[derive(Debug, Clone)]
pub struct WorstCase {
    pub value: f64,
    pub gamma: Option<f64>,
    pub form: WorstCaseForm,
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_nan() || delta < 0.0 {
        return Err(Error::InvalidRadius { got: delta });
    }
    Ok(())
}

/// Penalized vector: `beta` itself under the response-preserving cost, the
/// extended `(-beta, 1)` under the plain norm cost.
fn penalty_vector(beta: &DVector<f64>, use_barbeta: bool) -> Vec<f64> {
    if use_barbeta {
        let mut v: Vec<f64> = beta.iter().map(|b| -b).collect();
        v.push(1.0);
        v
    } else {
        beta.iter().cloned().collect()
    }
}

/// Square-loss worst case in closed form:
/// `(sqrt(MSE_n) + sqrt(delta) ||v||_p)^2`.
pub fn worstcase_linear_closed(
    ds: &Dataset,
    beta: &DVector<f64>,
    delta: f64,
    p: Exponent,
    use_barbeta: bool,
) -> Result<WorstCase> {
    ds.require_kind(TaskKind::Regression)?;
    check_delta(delta)?;
    let mse = ds.mse(beta);
    let v = penalty_vector(beta, use_barbeta);
    let value = (mse.sqrt() + delta.sqrt() * lp_norm(&v, p)?).powi(2);
    Ok(WorstCase {
        value,
        gamma: None,
        form: if use_barbeta {
            WorstCaseForm::ClosedLinearBarbeta
        } else {
            WorstCaseForm::ClosedLinear
        },
    })
}

/// Numerically stable `log(1 + exp(-m))`.
pub fn log_exp_loss(margin: f64) -> f64 {
    if margin >= 0.0 {
        (-margin).exp().ln_1p()
    } else {
        -margin + margin.exp().ln_1p()
    }
}

/// Log-exponential worst case: empirical loss plus `delta ||beta||_p`.
pub fn worstcase_logistic_closed(
    ds: &Dataset,
    beta: &DVector<f64>,
    delta: f64,
    p: Exponent,
) -> Result<WorstCase> {
    ds.require_kind(TaskKind::Binary)?;
    check_delta(delta)?;
    let margins = ds.x() * beta;
    let loss: f64 = margins
        .iter()
        .zip(ds.y().iter())
        .map(|(m, y)| log_exp_loss(y * m))
        .sum::<f64>()
        / ds.n() as f64;
    let value = loss + delta * lp_norm(beta.as_slice(), p)?;
    Ok(WorstCase {
        value,
        gamma: None,
        form: WorstCaseForm::ClosedLogistic,
    })
}

/// Hinge worst case: empirical hinge loss plus `delta ||beta||_p`.
pub fn worstcase_hinge_closed(
    ds: &Dataset,
    beta: &DVector<f64>,
    delta: f64,
    p: Exponent,
) -> Result<WorstCase> {
    ds.require_kind(TaskKind::Binary)?;
    check_delta(delta)?;
    let margins = ds.x() * beta;
    let loss: f64 = margins
        .iter()
        .zip(ds.y().iter())
        .map(|(m, y)| (1.0 - y * m).max(0.0))
        .sum::<f64>()
        / ds.n() as f64;
    let value = loss + delta * lp_norm(beta.as_slice(), p)?;
    Ok(WorstCase {
        value,
        gamma: None,
        form: WorstCaseForm::ClosedHinge,
    })
}

/// Square-loss worst case through the scalar dual
/// `min_{gamma > ||v||_p^2} gamma delta + gamma MSE_n / (gamma - ||v||_p^2)`
/// by golden-section search on the prescribed bracket. At `delta = 0` the
/// dual degenerates (the infimum is approached as gamma grows without a
/// minimizer) and the empirical MSE is returned directly in closed form.
pub fn worstcase_dual_numeric(
    ds: &Dataset,
    beta: &DVector<f64>,
    delta: f64,
    p: Exponent,
    use_barbeta: bool,
) -> Result<WorstCase> {
    ds.require_kind(TaskKind::Regression)?;
    check_delta(delta)?;
    let mse = ds.mse(beta);
    let v = penalty_vector(beta, use_barbeta);
    let a = lp_norm(&v, p)?.powi(2);
    if delta == 0.0 {
        return Ok(WorstCase {
            value: mse,
            gamma: None,
            form: if use_barbeta {
                WorstCaseForm::ClosedLinearBarbeta
            } else {
                WorstCaseForm::ClosedLinear
            },
        });
    }
    if a == 0.0 {
        // Zero penalty vector: the ball cannot inflate the loss.
        return Ok(WorstCase {
            value: mse,
            gamma: Some(0.0),
            form: WorstCaseForm::DualNumeric,
        });
    }
    let g = |gamma: f64| -> f64 { gamma * delta + gamma / (gamma - a) * mse };
    let lo = a * (1.0 + 1e-9);
    let hi = a * (1.0 + (mse / delta).sqrt()) * 10.0;
    if g(hi) < g(hi * (1.0 - 1e-7)) {
        return Err(Error::NumericBracket {
            what: format!("dual objective still decreasing at gamma = {hi}"),
        });
    }
    let phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut x0 = lo;
    let mut x3 = hi;
    let mut x1 = x3 - phi * (x3 - x0);
    let mut x2 = x0 + phi * (x3 - x0);
    let mut f1 = g(x1);
    let mut f2 = g(x2);
    while (x3 - x0) > 1e-10 * (x0.abs() + x3.abs() + 1e-30) {
        if f1 < f2 {
            x3 = x2;
            x2 = x1;
            f2 = f1;
            x1 = x3 - phi * (x3 - x0);
            f1 = g(x1);
        } else {
            x0 = x1;
            x1 = x2;
            f1 = f2;
            x2 = x0 + phi * (x3 - x0);
            f2 = g(x2);
        }
    }
    let gamma = 0.5 * (x0 + x3);
    Ok(WorstCase {
        value: g(gamma),
        gamma: Some(gamma),
        form: WorstCaseForm::DualNumeric,
    })
}
