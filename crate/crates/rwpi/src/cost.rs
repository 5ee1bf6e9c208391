//! Transport cost specification: `c(u, w) = ||w - u||_q^rho`, optionally
//! response-preserving (infinite cost whenever the response coordinate
//! moves, which confines ambiguity to the predictors).

use crate::error::{Error, Result};
use crate::norms::{dual_exponent, lp_norm_subgradient, lp_norm_unchecked, Exponent};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSpec {
    pub q: Exponent,
    pub rho: f64,
    pub modified: bool,
}

impl CostSpec {
    pub fn new(q: Exponent, rho: f64, modified: bool) -> Result<Self> {
        if rho < 1.0 || !rho.is_finite() {
            return Err(Error::InvalidPower { got: rho });
        }
        Ok(CostSpec { q, rho, modified })
    }

    /// Conjugate exponent of `q`.
    pub fn dual_exponent(&self) -> Exponent {
        dual_exponent(self.q).expect("validated at construction")
    }

    /// Cost of moving `w` to `u`, ignoring the response-preservation flag
    /// (callers handling modified costs freeze the response coordinate
    /// before evaluating).
    pub fn eval(&self, u: &[f64], w: &[f64]) -> f64 {
        let diff: Vec<f64> = u.iter().zip(w.iter()).map(|(a, b)| a - b).collect();
        lp_norm_unchecked(&diff, self.q).powf(self.rho)
    }

    /// A (sub)gradient of `u -> c(u, w)`.
    pub fn grad(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        let diff: Vec<f64> = u.iter().zip(w.iter()).map(|(a, b)| a - b).collect();
        let norm = lp_norm_unchecked(&diff, self.q);
        if norm == 0.0 {
            return vec![0.0; u.len()];
        }
        let scale = self.rho * norm.powf(self.rho - 1.0);
        lp_norm_subgradient(&diff, self.q)
            .into_iter()
            .map(|g| g * scale)
            .collect()
    }
}
