//! Limit-law bound used for logistic regression: the q-norm of a Gaussian
//! with the predictors' second-moment covariance.

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::Result;
use crate::gaussian::CovFactor;
use crate::limits::{LawMeta, LawName, LimitSampleBatch};
use crate::norms::{lp_norm_unchecked, Exponent};
use crate::rng::RngSeed;

/// One draw on a fixed realization: `||z||_q`.
pub fn l4_value(z: &DVector<f64>, q: Exponent) -> f64 {
    lp_norm_unchecked(z.as_slice(), q)
}

/// Sampler for the bound `||Z~||_q` with `Z~ ~ N(0, E[X X^T])`; the factor
/// argument is the (plug-in) second-moment factorization.
pub fn sample_l4(
    second_moment: &CovFactor,
    q: Exponent,
    n_draws: usize,
    seed: RngSeed,
) -> Result<LimitSampleBatch> {
    let values: Vec<f64> = (0..n_draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.stream(k as u64);
            let z = second_moment.sample(&mut rng);
            l4_value(&z, q)
        })
        .collect();
    Ok(LimitSampleBatch {
        law: LawName::L4,
        values,
        seed,
        meta: LawMeta {
            rho: Some(1.0),
            exponent: Some(q),
            cov_id: Some(second_moment.id()),
            saa_size: None,
            error_factor: None,
        },
    })
}
