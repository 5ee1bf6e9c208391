//! Radius/penalty selection procedures and the replication harness.

mod experiment;
mod generate;

pub use experiment::{
    coverage_probability, parse_config, run_experiment_csv, run_experiment_sim, Aggregate,
    ExperimentConfig, ExperimentKind, ExperimentReport, ExperimentRow, RunMethod,
};
pub use generate::{generate_linear_data, sparse_ground_truth};

use nalgebra::{DMatrix, DVector};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::gaussian::{sample_covariance, second_moment, CovFactor};
use crate::limits::{
    lambda_highdim, normal_error_factor, quantile, sample_l1, sample_l2, sample_l4,
    QuantileEstimate,
};
use crate::norms::{dual_exponent, Exponent};
use crate::rng::RngSeed;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectMethod {
    L1,
    L2,
    L4,
    Highdim,
}

impl SelectMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            SelectMethod::L1 => "l1",
            SelectMethod::L2 => "l2",
            SelectMethod::L4 => "l4",
            SelectMethod::Highdim => "highdim",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "l1" => Ok(SelectMethod::L1),
            "l2" => Ok(SelectMethod::L2),
            "l4" => Ok(SelectMethod::L4),
            "highdim" => Ok(SelectMethod::Highdim),
            other => Err(Error::Config {
                what: format!("unknown selection method '{other}' (expected l1, l2, l4, highdim)"),
            }),
        }
    }
}

/// A selected ball radius and the penalty weight it implies. The linear
/// procedures satisfy `lambda = sqrt(delta)`, the logistic one
/// `lambda = delta`; both identities are enforced at construction.
#[derive(Debug, Clone)]
pub struct RegularizationChoice {
    pub alpha: f64,
    pub method: SelectMethod,
    pub mc_draws: usize,
    pub eta_hat: QuantileEstimate,
    pub delta: f64,
    pub lambda: f64,
    pub seed: RngSeed,
}

impl RegularizationChoice {
    fn linear(
        alpha: f64,
        method: SelectMethod,
        mc_draws: usize,
        eta_hat: QuantileEstimate,
        n: usize,
        seed: RngSeed,
    ) -> Self {
        let delta = eta_hat.value / n as f64;
        RegularizationChoice {
            alpha,
            method,
            mc_draws,
            delta,
            lambda: delta.sqrt(),
            eta_hat,
            seed,
        }
    }

    fn logistic(
        alpha: f64,
        mc_draws: usize,
        eta_hat: QuantileEstimate,
        n: usize,
        seed: RngSeed,
    ) -> Self {
        let delta = eta_hat.value / (n as f64).sqrt();
        RegularizationChoice {
            alpha,
            method: SelectMethod::L4,
            mc_draws,
            delta,
            lambda: delta,
            eta_hat,
            seed,
        }
    }
}

/// Where the Gaussian covariance for the linear laws comes from.
#[derive(Debug, Clone)]
pub enum CovSource {
    /// Plug-in centered covariance of the dataset's predictors.
    Data(Dataset),
    Factor(CovFactor),
    /// Identity covariance of the given dimension.
    Dim(usize),
}

impl CovSource {
    fn dim(&self) -> usize {
        match self {
            CovSource::Data(ds) => ds.d(),
            CovSource::Factor(f) => f.dim(),
            CovSource::Dim(d) => *d,
        }
    }

    fn factor(&self) -> Result<CovFactor> {
        match self {
            CovSource::Data(ds) => {
                let cov = sample_covariance(ds.x())?;
                CovFactor::from_covariance(&cov)
            }
            CovSource::Factor(f) => Ok(f.clone()),
            CovSource::Dim(d) => Ok(CovFactor::identity(*d)),
        }
    }
}

/// Oracle pieces needed to sample the sharp linear law: the error scale and
/// coefficient, plus sample-average inputs for its penalty expectation.
#[derive(Debug, Clone)]
pub struct L1Model {
    pub sigma: f64,
    pub beta_star: DVector<f64>,
    pub x_saa: DMatrix<f64>,
    pub e_saa: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct LinearSelectInputs {
    pub cov: CovSource,
    pub l1_model: Option<L1Model>,
    /// Override for the distribution-free bound's error factor; defaults to
    /// the normal-error value pi/(pi-2).
    pub error_factor: Option<f64>,
}

impl LinearSelectInputs {
    pub fn from_data(ds: Dataset) -> Self {
        LinearSelectInputs {
            cov: CovSource::Data(ds),
            l1_model: None,
            error_factor: None,
        }
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidLevel {
            what: format!("alpha must be in (0,1), got {alpha}"),
        });
    }
    Ok(())
}

/// Penalty selection for square-loss regression: sample the chosen limit
/// law, take its (1-alpha) quantile eta, and set
/// `lambda = sqrt(delta) = sqrt(eta/n)`. The data-free `highdim` method
/// delegates to the closed-form rule instead of sampling.
pub fn select_lambda_linear(
    inputs: &LinearSelectInputs,
    n: usize,
    alpha: f64,
    q: Exponent,
    method: SelectMethod,
    mc_draws: usize,
    seed: RngSeed,
) -> Result<RegularizationChoice> {
    check_alpha(alpha)?;
    if n == 0 {
        return Err(Error::Config { what: "n must be positive".into() });
    }
    match method {
        SelectMethod::Highdim => {
            let d = inputs.cov.dim();
            let lambda = lambda_highdim(n, d, alpha)?;
            let eta = n as f64 * lambda * lambda;
            Ok(RegularizationChoice {
                alpha,
                method,
                mc_draws: 0,
                eta_hat: QuantileEstimate {
                    level: 1.0 - alpha,
                    value: eta,
                    sample_size: 0,
                    standard_error: 0.0,
                },
                delta: lambda * lambda,
                lambda,
                seed,
            })
        }
        SelectMethod::L2 => {
            if mc_draws == 0 {
                return Err(Error::Config {
                    what: "mc_draws must be positive for sampled methods".into(),
                });
            }
            let factor = inputs.cov.factor()?;
            let error_factor = inputs.error_factor.unwrap_or_else(normal_error_factor);
            let batch = sample_l2(&factor, q, error_factor, mc_draws, seed)?;
            let eta = quantile(&batch, 1.0 - alpha)?;
            Ok(RegularizationChoice::linear(
                alpha,
                method,
                mc_draws,
                eta,
                n,
                seed,
            ))
        }
        SelectMethod::L1 => {
            if mc_draws == 0 {
                return Err(Error::Config {
                    what: "mc_draws must be positive for sampled methods".into(),
                });
            }
            let model = inputs.l1_model.as_ref().ok_or_else(|| Error::Config {
                what: "method l1 needs an error model: sigma, beta_star, and SAA samples".into(),
            })?;
            let factor = inputs.cov.factor()?;
            let p = dual_exponent(q)?;
            let batch = sample_l1(
                model.sigma,
                &model.beta_star,
                &model.x_saa,
                &model.e_saa,
                &factor,
                p,
                mc_draws,
                seed,
            )?;
            let eta = quantile(&batch, 1.0 - alpha)?;
            Ok(RegularizationChoice::linear(
                alpha,
                method,
                mc_draws,
                eta,
                n,
                seed,
            ))
        }
        SelectMethod::L4 => Err(Error::Config {
            what: "method l4 applies to classification; use select_lambda_logistic".into(),
        }),
    }
}

/// Penalty selection for penalized logistic regression: quantile of the
/// `||Z~||_q` bound with the plug-in predictor second moment, then
/// `lambda = delta = eta / sqrt(n)`.
pub fn select_lambda_logistic(
    ds: &Dataset,
    alpha: f64,
    q: Exponent,
    mc_draws: usize,
    seed: RngSeed,
) -> Result<RegularizationChoice> {
    ds.require_kind(crate::dataset::TaskKind::Binary)?;
    let moment = second_moment(ds.x())?;
    let factor = CovFactor::from_covariance(&moment)?;
    select_lambda_logistic_with_moment(&factor, ds.n(), alpha, q, mc_draws, seed)
}

/// Logistic selection from an already-built second-moment factorization.
pub fn select_lambda_logistic_with_moment(
    moment: &CovFactor,
    n: usize,
    alpha: f64,
    q: Exponent,
    mc_draws: usize,
    seed: RngSeed,
) -> Result<RegularizationChoice> {
    check_alpha(alpha)?;
    if mc_draws == 0 {
        return Err(Error::Config {
            what: "mc_draws must be positive".into(),
        });
    }
    let batch = sample_l4(moment, q, mc_draws, seed)?;
    let eta = quantile(&batch, 1.0 - alpha)?;
    Ok(RegularizationChoice::logistic(alpha, mc_draws, eta, n, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::TaskKind;
    use crate::limits::probit;

    #[test]
    fn highdim_delegation_identity() {
        let inputs = LinearSelectInputs {
            cov: CovSource::Dim(300),
            l1_model: None,
            error_factor: None,
        };
        let c =
            select_lambda_linear(&inputs, 10_000, 0.05, Exponent::Infinity, SelectMethod::Highdim, 0, RngSeed::new(1))
                .unwrap();
        assert_eq!(c.lambda, lambda_highdim(10_000, 300, 0.05).unwrap());
        assert!((c.delta - c.lambda * c.lambda).abs() < 1e-18);
        assert!((c.eta_hat.value - 10_000.0 * c.delta).abs() < 1e-12);
    }

    #[test]
    fn l2_scalar_matches_chi_square_quantile() {
        // d = 1, Sigma = 1, q = 2: eta ~ (pi/(pi-2)) * chi2_1 quantile at 0.95.
        let inputs = LinearSelectInputs {
            cov: CovSource::Dim(1),
            l1_model: None,
            error_factor: None,
        };
        let n = 400;
        let c = select_lambda_linear(
            &inputs,
            n,
            0.05,
            Exponent::two(),
            SelectMethod::L2,
            60_000,
            RngSeed::new(7),
        )
        .unwrap();
        let z = probit(0.975).unwrap();
        let want = normal_error_factor() * z * z;
        assert!(
            (c.eta_hat.value - want).abs() < 4.0 * c.eta_hat.standard_error + 0.05,
            "eta {} want {want}",
            c.eta_hat.value
        );
        assert!((c.lambda - (c.eta_hat.value / n as f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn sampled_methods_need_draws_and_l1_needs_model() {
        let inputs = LinearSelectInputs {
            cov: CovSource::Dim(2),
            l1_model: None,
            error_factor: None,
        };
        assert!(select_lambda_linear(&inputs, 10, 0.05, Exponent::two(), SelectMethod::L2, 0, RngSeed::new(0)).is_err());
        assert!(select_lambda_linear(&inputs, 10, 0.05, Exponent::two(), SelectMethod::L1, 100, RngSeed::new(0)).is_err());
        assert!(select_lambda_linear(&inputs, 10, 1.2, Exponent::two(), SelectMethod::L2, 100, RngSeed::new(0)).is_err());
    }

    #[test]
    fn logistic_selection_scalar_half_normal() {
        use nalgebra::{DMatrix, DVector};
        // X fixed at +/-1 so E[X^2] = 1: eta ~ quantile of |N(0,1)| at 0.95,
        // which is probit(0.975).
        let n = 64;
        let x = DMatrix::from_fn(n, 1, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
        let y = DVector::from_fn(n, |i, _| if i % 3 == 0 { 1.0 } else { -1.0 });
        let ds = Dataset::new(x, y, TaskKind::Binary).unwrap();
        let c = select_lambda_logistic(&ds, 0.05, Exponent::two(), 60_000, RngSeed::new(3)).unwrap();
        let want = probit(0.975).unwrap();
        assert!(
            (c.eta_hat.value - want).abs() < 4.0 * c.eta_hat.standard_error + 0.02,
            "eta {} want {want}",
            c.eta_hat.value
        );
        assert!((c.lambda - c.delta).abs() < 1e-18);
        assert!((c.lambda - c.eta_hat.value / (n as f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn logistic_lambda_shrinks_as_alpha_grows() {
        use nalgebra::{DMatrix, DVector};
        let n = 32;
        let x = DMatrix::from_fn(n, 2, |i, j| ((i + j) as f64 * 0.7).sin());
        let y = DVector::from_fn(n, |i, _| if i % 2 == 0 { 1.0 } else { -1.0 });
        let ds = Dataset::new(x, y, TaskKind::Binary).unwrap();
        let lo = select_lambda_logistic(&ds, 0.05, Exponent::two(), 3_000, RngSeed::new(5)).unwrap();
        let hi = select_lambda_logistic(&ds, 0.95, Exponent::two(), 3_000, RngSeed::new(5)).unwrap();
        assert!(hi.lambda < lo.lambda);
        assert!(hi.lambda > 0.0);
    }

    #[test]
    fn alpha_monotonicity_for_fixed_batch() {
        let inputs = LinearSelectInputs {
            cov: CovSource::Dim(3),
            l1_model: None,
            error_factor: None,
        };
        let mut prev = f64::INFINITY;
        for alpha in [0.01, 0.05, 0.2, 0.5] {
            let c = select_lambda_linear(
                &inputs,
                100,
                alpha,
                Exponent::Infinity,
                SelectMethod::L2,
                4_000,
                RngSeed::new(9),
            )
            .unwrap();
            assert!(c.lambda <= prev);
            prev = c.lambda;
        }
    }
}
