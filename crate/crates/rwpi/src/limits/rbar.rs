//! Samplers for the limit law of the scaled profile function of a general
//! estimating equation.
//!
//! For transport power rho > 1 each draw maximizes
//! `rho zeta^T H - (rho-1) E||zeta^T Dh(W)||_p^{rho/(rho-1)}` over zeta, with
//! the expectation replaced by the sample average over the supplied
//! derivative matrices and `H ~ N(0, Cov[h])` from the plug-in covariance.
//! For rho = 1 the draw solves `max zeta^T H` subject to
//! `||zeta^T Dh(W_i)||_p <= 1` for every retained sample.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{second_moment, CovFactor};
use crate::limits::{LawMeta, LawName, LimitSampleBatch};
use crate::norms::{lp_norm_subgradient, lp_norm_unchecked, Exponent};
use crate::rng::RngSeed;

const FIRST_ORDER_TOL: f64 = 1e-8;
const UNBOUNDED_CEILING: f64 = 1e12;
const MAX_ASCENT_ITERATIONS: usize = 2_000;

/// One draw of the rho > 1 law on a fixed Gaussian realization `h`:
/// the concave maximization over zeta by gradient ascent.
pub fn rbar_value(h: &DVector<f64>, dh_samples: &[DMatrix<f64>], p: Exponent, rho: f64) -> Result<f64> {
    let s = rho / (rho - 1.0);
    let r = h.len();
    let objective_grad = |zeta: &DVector<f64>| -> (f64, DVector<f64>) {
        let mut pen = 0.0;
        let mut pen_grad = DVector::zeros(r);
        for d in dh_samples {
            let v = d.transpose() * zeta;
            let norm = lp_norm_unchecked(v.as_slice(), p);
            pen += norm.powf(s);
            if norm > 0.0 {
                let sub = DVector::from_vec(lp_norm_subgradient(v.as_slice(), p));
                pen_grad.axpy(s * norm.powf(s - 1.0), &(d * sub), 1.0);
            }
        }
        let scale = dh_samples.len() as f64;
        pen /= scale;
        pen_grad /= scale;
        let value = rho * zeta.dot(h) - (rho - 1.0) * pen;
        let grad = h * rho - pen_grad * (rho - 1.0);
        (value, grad)
    };
    let out = crate::opt::ascend(
        &|zeta| objective_grad(zeta),
        DVector::zeros(r),
        FIRST_ORDER_TOL,
        MAX_ASCENT_ITERATIONS,
        UNBOUNDED_CEILING,
    );
    if out.diverged {
        return Err(Error::UnboundedLaw {
            what: "zeta ascent diverged; the derivative penalty does not control this direction",
        });
    }
    Ok(out.value.max(0.0))
}

/// One draw of the rho = 1 law on a fixed Gaussian realization: maximize
/// `zeta^T h` over the gauge ball `max_i ||zeta^T Dh(W_i)||_p <= 1`.
pub fn rbar_one_value(h: &DVector<f64>, dh_samples: &[DMatrix<f64>], p: Exponent) -> Result<f64> {
    let gauge = |zeta: &DVector<f64>| -> f64 {
        dh_samples
            .iter()
            .map(|d| lp_norm_unchecked((d.transpose() * zeta).as_slice(), p))
            .fold(0.0f64, f64::max)
    };
    if dh_samples
        .iter()
        .all(|d| d.iter().all(|v| *v == 0.0))
    {
        return Err(Error::UnboundedLaw {
            what: "all derivative samples vanish; the feasible set is unbounded",
        });
    }
    let r = h.len();
    if h.norm() == 0.0 {
        return Ok(0.0);
    }
    if r == 1 {
        // Scalar case in closed form: |zeta| <= 1 / max_i ||Dh_i||_p.
        let scale = dh_samples
            .iter()
            .map(|d| lp_norm_unchecked(d.row(0).transpose().as_slice(), p))
            .fold(0.0f64, f64::max);
        if scale == 0.0 {
            return Err(Error::UnboundedLaw {
                what: "all derivative samples vanish; the feasible set is unbounded",
            });
        }
        return Ok(h[0].abs() / scale);
    }
    // General case: ascent on the scale-invariant ratio zeta^T h / gauge(zeta)
    // from several deterministic starts, renormalizing to the gauge sphere.
    let gauge_subgrad = |zeta: &DVector<f64>| -> DVector<f64> {
        let mut best = 0usize;
        let mut best_norm = -1.0;
        for (j, d) in dh_samples.iter().enumerate() {
            let norm = lp_norm_unchecked((d.transpose() * zeta).as_slice(), p);
            if norm > best_norm {
                best_norm = norm;
                best = j;
            }
        }
        let d = &dh_samples[best];
        let v = d.transpose() * zeta;
        d * DVector::from_vec(lp_norm_subgradient(v.as_slice(), p))
    };
    let mut starts: Vec<DVector<f64>> = vec![h.normalize()];
    for k in 0..r {
        let mut e = DVector::zeros(r);
        e[k] = if h[k] >= 0.0 { 1.0 } else { -1.0 };
        starts.push(e);
    }
    let mut best_value: f64 = 0.0;
    for start in starts {
        let mut zeta = start;
        let g0 = gauge(&zeta);
        if g0 <= 1e-14 {
            if zeta.dot(h) > 0.0 {
                return Err(Error::UnboundedLaw {
                    what: "a gauge-null direction has positive objective",
                });
            }
            continue;
        }
        zeta /= g0;
        let mut ratio = zeta.dot(h);
        best_value = best_value.max(ratio);
        let mut step = 1.0;
        for _ in 0..2_000 {
            let g = gauge(&zeta);
            let gs = gauge_subgrad(&zeta);
            // Supergradient of the ratio at gauge(zeta) = 1.
            let dir = h - &gs * zeta.dot(h) / g;
            if dir.norm() <= 1e-12 {
                break;
            }
            let mut t = step;
            let mut accepted = false;
            while t > 1e-16 {
                let mut cand = &zeta + &dir * t;
                let cg = gauge(&cand);
                if cg <= 1e-14 {
                    if cand.dot(h) > 0.0 {
                        return Err(Error::UnboundedLaw {
                            what: "a gauge-null direction has positive objective",
                        });
                    }
                    t *= 0.5;
                    continue;
                }
                cand /= cg;
                let cr = cand.dot(h);
                if cr > ratio + 1e-16 {
                    zeta = cand;
                    ratio = cr;
                    step = t * 2.0;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        best_value = best_value.max(ratio);
    }
    Ok(best_value.max(0.0))
}

fn plugin_factor(h_samples: &DMatrix<f64>) -> Result<CovFactor> {
    let cov = second_moment(h_samples)?;
    CovFactor::from_covariance(&cov)
}

fn check_dims(h_samples: &DMatrix<f64>, dh_samples: &[DMatrix<f64>]) -> Result<()> {
    if h_samples.nrows() == 0 {
        return Err(Error::EmptyInput { what: "h_samples" });
    }
    if dh_samples.is_empty() {
        return Err(Error::EmptyInput { what: "dh_samples" });
    }
    let r = h_samples.ncols();
    for d in dh_samples {
        if d.nrows() != r {
            return Err(Error::DimensionMismatch {
                what: "dh rows vs h columns",
                expected: r,
                got: d.nrows(),
            });
        }
    }
    Ok(())
}

/// Limit-law sampler for transport power `rho > 1`.
pub fn sample_rbar(
    rho: f64,
    h_samples: &DMatrix<f64>,
    dh_samples: &[DMatrix<f64>],
    p: Exponent,
    n_draws: usize,
    seed: RngSeed,
) -> Result<LimitSampleBatch> {
    if rho <= 1.0 {
        return Err(Error::UseRbarOne);
    }
    check_dims(h_samples, dh_samples)?;
    let factor = plugin_factor(h_samples)?;
    let values: Result<Vec<f64>> = (0..n_draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.stream(k as u64);
            let h = factor.sample(&mut rng);
            rbar_value(&h, dh_samples, p, rho)
        })
        .collect();
    Ok(LimitSampleBatch {
        law: LawName::RbarRho,
        values: values?,
        seed,
        meta: LawMeta {
            rho: Some(rho),
            exponent: Some(p),
            cov_id: Some(factor.id()),
            saa_size: Some(dh_samples.len()),
            error_factor: None,
        },
    })
}

/// Limit-law sampler for transport power `rho = 1`.
pub fn sample_rbar_one(
    h_samples: &DMatrix<f64>,
    dh_samples: &[DMatrix<f64>],
    p: Exponent,
    n_draws: usize,
    seed: RngSeed,
) -> Result<LimitSampleBatch> {
    check_dims(h_samples, dh_samples)?;
    let factor = plugin_factor(h_samples)?;
    let values: Result<Vec<f64>> = (0..n_draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.stream(k as u64);
            let h = factor.sample(&mut rng);
            rbar_one_value(&h, dh_samples, p)
        })
        .collect();
    Ok(LimitSampleBatch {
        law: LawName::RbarOne,
        values: values?,
        seed,
        meta: LawMeta {
            rho: Some(1.0),
            exponent: Some(p),
            cov_id: Some(factor.id()),
            saa_size: Some(dh_samples.len()),
            error_factor: None,
        },
    })
}
