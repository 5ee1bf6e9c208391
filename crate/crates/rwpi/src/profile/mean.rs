//! Closed-form profile value for estimating a scalar mean.
//!
//! For `h(w, theta) = w - theta` and cost `|u - w|^rho`, the dual collapses
//! to a one-dimensional Fenchel pair and the profile value is exactly
//! `|mean(samples) - theta|^rho`.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::norms::sign;
use crate::profile::{ProfileMethod, RwpValue};

pub fn rwp_mean(samples: &[f64], theta: f64, rho: f64) -> Result<RwpValue> {
    if samples.is_empty() {
        return Err(Error::EmptyInput { what: "rwp_mean samples" });
    }
    if samples.iter().any(|v| !v.is_finite()) || !theta.is_finite() {
        return Err(Error::NonFinite { what: "rwp_mean inputs" });
    }
    if rho < 1.0 {
        return Err(Error::InvalidPower { got: rho });
    }
    let dev = samples.iter().sum::<f64>() / samples.len() as f64 - theta;
    let value = dev.abs().powf(rho);
    // Maximizer of the dual: lambda = -sign(dev) for rho = 1, otherwise
    // -rho * sign(dev) * |dev|^(rho - 1).
    let lambda = if rho == 1.0 {
        -sign(dev)
    } else {
        -rho * sign(dev) * dev.abs().powf(rho - 1.0)
    };
    Ok(RwpValue {
        value,
        dual_point: DVector::from_vec(vec![lambda]),
        iterations: 0,
        converged: true,
        method: ProfileMethod::MeanClosedForm,
    })
}
