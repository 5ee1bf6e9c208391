//! The profile function `R_n(theta)`: the least transport discrepancy from
//! the empirical measure to any measure satisfying the estimating equation.
//!
//! Exact finite-sample values are available for the mean case and for linear
//! regression under the squared l2 response-preserving cost; everything else
//! goes through the best-effort generic dual evaluator.

mod generic;
mod linear;
mod mean;

pub use generic::{rwp_generic_dual, GenericDualOpts};
pub use linear::{rwp_linear_q2, rwp_linear_q2_dual_objective};
pub use mean::rwp_mean;

use nalgebra::DVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileMethod {
    MeanClosedForm,
    LinearQ2Dual,
    GenericDual,
}

impl ProfileMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            ProfileMethod::MeanClosedForm => "mean-closed-form",
            ProfileMethod::LinearQ2Dual => "linear-q2-dual",
            ProfileMethod::GenericDual => "generic-dual",
        }
    }
}

/// A computed profile value with its maximizing dual point.
#[derive(Debug, Clone)]
pub struct RwpValue {
    pub value: f64,
    pub dual_point: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub method: ProfileMethod,
}
