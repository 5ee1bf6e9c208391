//! Runtime-selectable limit-law strategies.
//!
//! Every sampler sits behind [`LimitLaw`] with a shared input bundle; a law
//! validates the pieces it actually needs and reports a configuration error
//! naming whatever is missing. New laws register in [`registry`].

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::gaussian::CovFactor;
use crate::limits::{
    sample_l1, sample_l2, sample_l4, sample_rbar, sample_rbar_one, LimitSampleBatch,
};
use crate::norms::Exponent;
use crate::rng::RngSeed;

/// Input bundle covering every registered law; each strategy picks what it
/// needs.
#[derive(Debug, Clone)]
pub struct LawInputs {
    /// Gaussian covariance factorization: `Cov[X]` for the linear laws, the
    /// predictor second moment for the logistic bound.
    pub cov: Option<CovFactor>,
    /// Norm exponent: the dual exponent `p` for `rbar`/`rbar1`/`l1`, the cost
    /// exponent `q` for `l2`/`l4`.
    pub exponent: Exponent,
    pub rho: f64,
    /// `E[e^2]/Var|e|` for the distribution-free linear bound.
    pub error_factor: Option<f64>,
    pub sigma: Option<f64>,
    pub beta_star: Option<DVector<f64>>,
    pub x_saa: Option<DMatrix<f64>>,
    pub e_saa: Option<Vec<f64>>,
    pub h_samples: Option<DMatrix<f64>>,
    pub dh_samples: Option<Vec<DMatrix<f64>>>,
}

impl LawInputs {
    pub fn new(exponent: Exponent) -> Self {
        LawInputs {
            cov: None,
            exponent,
            rho: 2.0,
            error_factor: None,
            sigma: None,
            beta_star: None,
            x_saa: None,
            e_saa: None,
            h_samples: None,
            dh_samples: None,
        }
    }
}

pub trait LimitLaw: Send + Sync {
    fn name(&self) -> &'static str;
    fn sample(&self, inputs: &LawInputs, n_draws: usize, seed: RngSeed)
        -> Result<LimitSampleBatch>;
}

fn missing(law: &str, what: &str) -> Error {
    Error::Config {
        what: format!("law '{law}' requires {what}"),
    }
}

struct RbarLaw;

impl LimitLaw for RbarLaw {
    fn name(&self) -> &'static str {
        "rbar"
    }

    fn sample(&self, i: &LawInputs, n: usize, seed: RngSeed) -> Result<LimitSampleBatch> {
        let h = i.h_samples.as_ref().ok_or_else(|| missing("rbar", "h_samples"))?;
        let dh = i.dh_samples.as_ref().ok_or_else(|| missing("rbar", "dh_samples"))?;
        sample_rbar(i.rho, h, dh, i.exponent, n, seed)
    }
}

struct RbarOneLaw;

impl LimitLaw for RbarOneLaw {
    fn name(&self) -> &'static str {
        "rbar1"
    }

    fn sample(&self, i: &LawInputs, n: usize, seed: RngSeed) -> Result<LimitSampleBatch> {
        let h = i.h_samples.as_ref().ok_or_else(|| missing("rbar1", "h_samples"))?;
        let dh = i.dh_samples.as_ref().ok_or_else(|| missing("rbar1", "dh_samples"))?;
        sample_rbar_one(h, dh, i.exponent, n, seed)
    }
}

struct SharpLinearLaw;

impl LimitLaw for SharpLinearLaw {
    fn name(&self) -> &'static str {
        "l1"
    }

    fn sample(&self, i: &LawInputs, n: usize, seed: RngSeed) -> Result<LimitSampleBatch> {
        let sigma = i.sigma.ok_or_else(|| missing("l1", "sigma (error scale)"))?;
        let beta = i
            .beta_star
            .as_ref()
            .ok_or_else(|| missing("l1", "beta_star"))?;
        let x = i
            .x_saa
            .as_ref()
            .ok_or_else(|| missing("l1", "x_saa (predictor SAA sample)"))?;
        let e = i
            .e_saa
            .as_ref()
            .ok_or_else(|| missing("l1", "e_saa (error SAA sample)"))?;
        let cov = i.cov.as_ref().ok_or_else(|| missing("l1", "cov"))?;
        sample_l1(sigma, beta, x, e, cov, i.exponent, n, seed)
    }
}

struct BoundLinearLaw;

impl LimitLaw for BoundLinearLaw {
    fn name(&self) -> &'static str {
        "l2"
    }

    fn sample(&self, i: &LawInputs, n: usize, seed: RngSeed) -> Result<LimitSampleBatch> {
        let cov = i.cov.as_ref().ok_or_else(|| missing("l2", "cov"))?;
        let factor = i
            .error_factor
            .ok_or_else(|| missing("l2", "error_factor"))?;
        sample_l2(cov, i.exponent, factor, n, seed)
    }
}

struct BoundLogisticLaw;

impl LimitLaw for BoundLogisticLaw {
    fn name(&self) -> &'static str {
        "l4"
    }

    fn sample(&self, i: &LawInputs, n: usize, seed: RngSeed) -> Result<LimitSampleBatch> {
        let cov = i
            .cov
            .as_ref()
            .ok_or_else(|| missing("l4", "cov (predictor second moment)"))?;
        sample_l4(cov, i.exponent, n, seed)
    }
}

/// All registered laws.
pub fn registry() -> Vec<Box<dyn LimitLaw>> {
    vec![
        Box::new(RbarLaw),
        Box::new(RbarOneLaw),
        Box::new(SharpLinearLaw),
        Box::new(BoundLinearLaw),
        Box::new(BoundLogisticLaw),
    ]
}

pub fn law_names() -> Vec<&'static str> {
    registry().iter().map(|l| l.name()).collect()
}

pub fn law_by_name(name: &str) -> Result<Box<dyn LimitLaw>> {
    registry()
        .into_iter()
        .find(|l| l.name() == name)
        .ok_or_else(|| Error::Config {
            what: format!(
                "unknown law '{name}'; registered laws: {}",
                law_names().join(", ")
            ),
        })
}
