//! Fitters for the estimators the robust formulations are equivalent to.
//!
//! The three models sit behind the [`Estimator`] trait and are selected by
//! name (`sqrt-lasso`, `logistic`, `ols`); [`cross_validate_lambda`] is the
//! conventional baseline the radius-selection procedures are compared to.

mod logistic;
mod ols;
mod sqrt_lasso;

pub use logistic::{fit_logistic_lp, fit_logistic_lp_traced};
pub use ols::fit_ols;
pub use sqrt_lasso::{fit_sqrt_lasso, fit_sqrt_lasso_traced};

use nalgebra::DVector;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::norms::{lp_norm_unchecked, Exponent};
use crate::rng::RngSeed;
use crate::worstcase::log_exp_loss;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitWarning {
    /// The data looked linearly separable while fitting an unpenalized
    /// logistic model; the minimizer runs off to infinity.
    Separable,
}

impl FitWarning {
    pub fn as_str(&self) -> &'static str {
        match self {
            FitWarning::Separable => "separable",
        }
    }
}

#[derive(Debug, Clone)]
pub struct FitResult {
    pub beta: DVector<f64>,
    pub objective: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub lambda: f64,
    pub warning: Option<FitWarning>,
}

#[derive(Debug, Clone, Copy)]
pub struct FitCaps {
    /// Outer concomitant updates for the square-root objective.
    pub outer: usize,
    /// Total coordinate-descent passes across the whole fit.
    pub coordinate_passes: usize,
    /// Proximal-gradient steps.
    pub prox_steps: usize,
}

impl Default for FitCaps {
    fn default() -> Self {
        FitCaps {
            outer: 200,
            coordinate_passes: 100_000,
            prox_steps: 10_000,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct FitConfig {
    pub lambda: f64,
    pub p: Exponent,
    pub tol: f64,
    pub caps: FitCaps,
}

impl FitConfig {
    pub fn new(lambda: f64, p: Exponent) -> Self {
        FitConfig {
            lambda,
            p,
            tol: 1e-8,
            caps: FitCaps::default(),
        }
    }
}

/// Distance of `-grad` from `lambda` times the subdifferential of the
/// p-norm at `beta` (infinity-norm of the smallest violation); this is the
/// shared optimality residual for both penalized fitters.
pub(crate) fn penalized_kkt_residual(
    grad: &DVector<f64>,
    beta: &DVector<f64>,
    lambda: f64,
    p: Exponent,
) -> f64 {
    if lambda == 0.0 {
        return grad.amax();
    }
    match p {
        Exponent::Finite(1.0) => {
            let mut worst: f64 = 0.0;
            for j in 0..beta.len() {
                let r = if beta[j] > 0.0 {
                    (grad[j] + lambda).abs()
                } else if beta[j] < 0.0 {
                    (grad[j] - lambda).abs()
                } else {
                    (grad[j].abs() - lambda).max(0.0)
                };
                worst = worst.max(r);
            }
            worst
        }
        Exponent::Finite(_) => {
            // p = 2 (the only other supported penalty exponent).
            let bnorm = beta.norm();
            if bnorm > 0.0 {
                let mut worst: f64 = 0.0;
                for j in 0..beta.len() {
                    worst = worst.max((grad[j] + lambda * beta[j] / bnorm).abs());
                }
                worst
            } else {
                (grad.norm() - lambda).max(0.0)
            }
        }
        Exponent::Infinity => {
            // Penalties are restricted to p in {1, 2}; the infinity norm
            // never reaches this path through the public fitters.
            (grad.norm() - lambda).max(0.0)
        }
    }
}

pub(crate) fn require_penalty_exponent(p: Exponent) -> Result<()> {
    match p {
        Exponent::Finite(v) if v == 1.0 || v == 2.0 => Ok(()),
        other => Err(Error::Config {
            what: format!("penalty exponent must be 1 or 2, got {other}"),
        }),
    }
}

/// Named estimator strategies.
pub trait Estimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn fit(&self, ds: &Dataset, cfg: &FitConfig) -> Result<FitResult>;
}

struct SqrtLassoEstimator;
struct LogisticEstimator;
struct OlsEstimator;

impl Estimator for SqrtLassoEstimator {
    fn name(&self) -> &'static str {
        "sqrt-lasso"
    }
    fn fit(&self, ds: &Dataset, cfg: &FitConfig) -> Result<FitResult> {
        fit_sqrt_lasso(ds, cfg.lambda, cfg.p, cfg.tol, cfg.caps)
    }
}

impl Estimator for LogisticEstimator {
    fn name(&self) -> &'static str {
        "logistic"
    }
    fn fit(&self, ds: &Dataset, cfg: &FitConfig) -> Result<FitResult> {
        fit_logistic_lp(ds, cfg.lambda, cfg.p, cfg.tol, cfg.caps)
    }
}

impl Estimator for OlsEstimator {
    fn name(&self) -> &'static str {
        "ols"
    }
    fn fit(&self, ds: &Dataset, _cfg: &FitConfig) -> Result<FitResult> {
        fit_ols(ds)
    }
}

pub fn estimator_registry() -> Vec<Box<dyn Estimator>> {
    vec![
        Box::new(SqrtLassoEstimator),
        Box::new(LogisticEstimator),
        Box::new(OlsEstimator),
    ]
}

pub fn estimator_by_name(name: &str) -> Result<Box<dyn Estimator>> {
    estimator_registry()
        .into_iter()
        .find(|e| e.name() == name)
        .ok_or_else(|| Error::Config {
            what: format!("unknown model '{name}'; registered models: sqrt-lasso, logistic, ols"),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CvObjective {
    SqrtLasso,
    Logistic,
}

/// Grid-search cross-validation over the penalty weight: seeded random
/// fold assignment, mean out-of-fold loss (square loss or log-exponential
/// loss), ties broken by the first grid index.
pub fn cross_validate_lambda(
    ds: &Dataset,
    folds: usize,
    grid: &[f64],
    objective: CvObjective,
    p: Exponent,
    seed: RngSeed,
) -> Result<f64> {
    if folds < 2 {
        return Err(Error::Config {
            what: format!("cross-validation needs at least 2 folds, got {folds}"),
        });
    }
    if grid.is_empty() {
        return Err(Error::EmptyInput { what: "cross-validation grid" });
    }
    let n = ds.n();
    if folds > n {
        return Err(Error::Config {
            what: format!("{folds} folds cannot partition {n} rows"),
        });
    }
    // Seeded shuffle, then round-robin fold assignment.
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = seed.stream(0);
    for i in (1..n).rev() {
        let j = rand::Rng::gen_range(&mut rng, 0..=i);
        order.swap(i, j);
    }
    let fold_of: Vec<usize> = {
        let mut f = vec![0; n];
        for (pos, &idx) in order.iter().enumerate() {
            f[idx] = pos % folds;
        }
        f
    };
    if (0..folds).any(|f| fold_of.iter().filter(|&&g| g != f).count() == 0) {
        return Err(Error::Config {
            what: "a fold leaves an empty training set".into(),
        });
    }

    let splits: Vec<(Dataset, Vec<usize>)> = (0..folds)
        .map(|f| {
            let train_rows: Vec<usize> =
                (0..n).filter(|i| fold_of[*i] != f).collect();
            let test_rows: Vec<usize> = (0..n).filter(|i| fold_of[*i] == f).collect();
            let x = ds.x().select_rows(train_rows.iter());
            let y = DVector::from_iterator(
                train_rows.len(),
                train_rows.iter().map(|&i| ds.y()[i]),
            );
            (
                Dataset::new(x, y, ds.kind()).expect("row subset stays valid"),
                test_rows,
            )
        })
        .collect();

    let mut losses = vec![0.0f64; grid.len()];
    for (g, &lambda) in grid.iter().enumerate() {
        let per_fold: Result<Vec<f64>> = splits
            .par_iter()
            .map(|(train, test_rows)| -> Result<f64> {
                let cfg = FitConfig::new(lambda, p);
                let fit = match objective {
                    CvObjective::SqrtLasso => fit_sqrt_lasso(train, lambda, p, cfg.tol, cfg.caps)?,
                    CvObjective::Logistic => fit_logistic_lp(train, lambda, p, cfg.tol, cfg.caps)?,
                };
                let mut total = 0.0;
                for &i in test_rows {
                    let pred = ds.x().row(i).transpose().dot(&fit.beta);
                    total += match objective {
                        CvObjective::SqrtLasso => (ds.y()[i] - pred) * (ds.y()[i] - pred),
                        CvObjective::Logistic => log_exp_loss(ds.y()[i] * pred),
                    };
                }
                Ok(total)
            })
            .collect();
        losses[g] = per_fold?.iter().sum::<f64>() / n as f64;
    }
    let mut best = 0;
    for g in 1..grid.len() {
        if losses[g] < losses[best] {
            best = g;
        }
    }
    Ok(grid[best])
}

/// Largest penalty that still moves the square-root lasso away from zero;
/// handy for building cross-validation grids.
pub fn sqrt_lasso_zero_threshold(ds: &Dataset) -> f64 {
    let n = ds.n() as f64;
    let ynorm = ds.y().norm();
    if ynorm == 0.0 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for j in 0..ds.d() {
        worst = worst.max(ds.x().column(j).dot(ds.y()).abs());
    }
    worst / (n.sqrt() * ynorm)
}

/// Log-spaced cross-validation grid below the zero threshold.
pub fn default_cv_grid(ds: &Dataset, points: usize) -> Vec<f64> {
    let top = sqrt_lasso_zero_threshold(ds).max(1e-8);
    let bottom = top * 1e-3;
    (0..points)
        .map(|i| {
            let t = i as f64 / (points - 1).max(1) as f64;
            bottom * (top / bottom).powf(t)
        })
        .collect()
}

pub(crate) fn objective_value(
    ds: &Dataset,
    beta: &DVector<f64>,
    lambda: f64,
    p: Exponent,
    sqrt_loss: bool,
) -> f64 {
    let penalty = lambda * lp_norm_unchecked(beta.as_slice(), p);
    if sqrt_loss {
        ds.mse(beta).sqrt() + penalty
    } else {
        let margins = ds.x() * beta;
        margins
            .iter()
            .zip(ds.y().iter())
            .map(|(m, y)| log_exp_loss(y * m))
            .sum::<f64>()
            / ds.n() as f64
            + penalty
    }
}
