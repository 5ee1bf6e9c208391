//! Limit laws for the linear-regression profile function: the sharp law
//! (each draw solves a concave program over xi) and its distribution-free
//! stochastic upper bound (a scaled squared norm of the same Gaussian).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gaussian::{CovFactor, EIGENVALUE_FLOOR};
use crate::limits::{LawMeta, LawName, LimitSampleBatch};
use crate::norms::{lp_norm_subgradient, lp_norm_unchecked, Exponent};
use crate::rng::RngSeed;

const FIRST_ORDER_TOL: f64 = 1e-8;
const UNBOUNDED_CEILING: f64 = 1e12;
const MAX_ASCENT_ITERATIONS: usize = 1_500;

/// Sample-average penalty `xi -> (1/S) sum_j ||e_j xi - (xi^T X_j) b*||_p^2`
/// shared by every draw of the sharp law.
struct SaaPenalty<'a> {
    x: &'a DMatrix<f64>,
    e: &'a [f64],
    beta_star: &'a DVector<f64>,
    p: Exponent,
}

impl<'a> SaaPenalty<'a> {
    fn value_grad(&self, xi: &DVector<f64>) -> (f64, DVector<f64>) {
        let d = xi.len();
        let s = self.e.len() as f64;
        let mut value = 0.0;
        let mut grad = DVector::zeros(d);
        for (j, ej) in self.e.iter().enumerate() {
            let xj = self.x.row(j).transpose();
            let v = xi * *ej - self.beta_star * xi.dot(&xj);
            let norm = lp_norm_unchecked(v.as_slice(), self.p);
            value += norm * norm;
            if norm > 0.0 {
                let sub = DVector::from_vec(lp_norm_subgradient(v.as_slice(), self.p));
                // d/d xi of ||B xi||_p with B = e_j I - b* X_j^T is B^T sub.
                let bt = &sub * *ej - &xj * self.beta_star.dot(&sub);
                grad.axpy(2.0 * norm, &bt, 1.0);
            }
        }
        (value / s, grad / s)
    }
}

/// One draw of the sharp law on a fixed Gaussian realization `z`:
/// `max_xi 2 sigma xi^T z - penalty(xi)`. The p = 2 case solves the normal
/// equations of the quadratic penalty; other exponents run gradient ascent.
pub fn l1_value(
    z: &DVector<f64>,
    sigma: f64,
    beta_star: &DVector<f64>,
    x_saa: &DMatrix<f64>,
    e_saa: &[f64],
    p: Exponent,
) -> Result<f64> {
    let d = z.len();
    if p == Exponent::two() {
        // Penalty = xi^T Q xi with
        // Q = mean(e^2) I - (b* m_ex^T + m_ex b*^T) + ||b*||^2 mean(X X^T).
        let s = e_saa.len() as f64;
        let m_ee = e_saa.iter().map(|v| v * v).sum::<f64>() / s;
        let mut m_ex = DVector::zeros(d);
        let mut m_xx = DMatrix::zeros(d, d);
        for (j, ej) in e_saa.iter().enumerate() {
            let xj = x_saa.row(j).transpose();
            m_ex.axpy(ej / s, &xj, 1.0);
            m_xx.syger(1.0 / s, &xj, &xj, 1.0);
        }
        for i in 0..d {
            for j in (i + 1)..d {
                m_xx[(i, j)] = m_xx[(j, i)];
            }
        }
        let bb = beta_star.norm_squared();
        let mut q = m_xx * bb;
        for i in 0..d {
            q[(i, i)] += m_ee;
            for j in 0..d {
                q[(i, j)] -= beta_star[i] * m_ex[j] + m_ex[i] * beta_star[j];
            }
        }
        // max 2 sigma xi.z - xi^T Q xi = sigma^2 z^T Q^{-1} z on range(Q).
        let eig = q.symmetric_eigen();
        let mut value = 0.0;
        for k in 0..d {
            let comp = eig.eigenvectors.column(k).dot(z);
            if eig.eigenvalues[k] < EIGENVALUE_FLOOR {
                if (sigma * comp).abs() > 1e-10 {
                    return Err(Error::UnboundedLaw {
                        what: "the SAA penalty vanishes along a direction seen by Z",
                    });
                }
            } else {
                value += sigma * sigma * comp * comp / eig.eigenvalues[k];
            }
        }
        return Ok(value);
    }
    let penalty = SaaPenalty {
        x: x_saa,
        e: e_saa,
        beta_star,
        p,
    };
    let objective_grad = |xi: &DVector<f64>| -> (f64, DVector<f64>) {
        let (pv, pg) = penalty.value_grad(xi);
        (2.0 * sigma * xi.dot(z) - pv, z * (2.0 * sigma) - pg)
    };
    let out = crate::opt::ascend(
        &objective_grad,
        DVector::zeros(d),
        FIRST_ORDER_TOL,
        MAX_ASCENT_ITERATIONS,
        UNBOUNDED_CEILING,
    );
    if out.diverged {
        return Err(Error::UnboundedLaw {
            what: "xi ascent diverged; the SAA penalty vanishes along a direction",
        });
    }
    Ok(out.value.max(0.0))
}

/// Sharp limit law for linear regression: needs the error scale, the true
/// coefficient, and sample-average inputs for the penalty expectation.
#[allow(clippy::too_many_arguments)]
pub fn sample_l1(
    sigma: f64,
    beta_star: &DVector<f64>,
    x_saa: &DMatrix<f64>,
    e_saa: &[f64],
    cov: &CovFactor,
    p: Exponent,
    n_draws: usize,
    seed: RngSeed,
) -> Result<LimitSampleBatch> {
    if x_saa.nrows() == 0 || e_saa.is_empty() {
        return Err(Error::EmptyInput { what: "L1 SAA inputs" });
    }
    if x_saa.nrows() != e_saa.len() {
        return Err(Error::DimensionMismatch {
            what: "SAA predictor rows vs error draws",
            expected: x_saa.nrows(),
            got: e_saa.len(),
        });
    }
    if cov.dim() != beta_star.len() || x_saa.ncols() != beta_star.len() {
        return Err(Error::DimensionMismatch {
            what: "covariance/SAA dimension vs beta_star",
            expected: beta_star.len(),
            got: cov.dim(),
        });
    }
    let values: Result<Vec<f64>> = (0..n_draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.stream(k as u64);
            let z = cov.sample(&mut rng);
            l1_value(&z, sigma, beta_star, x_saa, e_saa, p)
        })
        .collect();
    Ok(LimitSampleBatch {
        law: LawName::L1,
        values: values?,
        seed,
        meta: LawMeta {
            rho: Some(2.0),
            exponent: Some(p),
            cov_id: Some(cov.id()),
            saa_size: Some(e_saa.len()),
            error_factor: None,
        },
    })
}

/// The normal-error value of `E[e^2] / (E[e^2] - (E|e|)^2)`.
pub fn normal_error_factor() -> f64 {
    std::f64::consts::PI / (std::f64::consts::PI - 2.0)
}

/// One draw of the distribution-free bound on a fixed realization.
pub fn l2_value(z: &DVector<f64>, q: Exponent, error_factor: f64) -> f64 {
    let norm = lp_norm_unchecked(z.as_slice(), q);
    error_factor * norm * norm
}

/// Stochastic upper bound for the linear-regression law:
/// `error_factor * ||Z||_q^2` with `Z ~ N(0, Sigma)`.
pub fn sample_l2(
    cov: &CovFactor,
    q: Exponent,
    error_factor: f64,
    n_draws: usize,
    seed: RngSeed,
) -> Result<LimitSampleBatch> {
    if error_factor.is_nan() || error_factor <= 0.0 {
        return Err(Error::InvalidFactor { got: error_factor });
    }
    let values: Vec<f64> = (0..n_draws)
        .into_par_iter()
        .map(|k| {
            let mut rng = seed.stream(k as u64);
            let z = cov.sample(&mut rng);
            l2_value(&z, q, error_factor)
        })
        .collect();
    Ok(LimitSampleBatch {
        law: LawName::L2,
        values,
        seed,
        meta: LawMeta {
            rho: Some(2.0),
            exponent: Some(q),
            cov_id: Some(cov.id()),
            saa_size: None,
            error_factor: Some(error_factor),
        },
    })
}
