//! Robust Wasserstein profile inference.
//!
//! Evaluates the profile function of an estimating equation under optimal
//! transport discrepancies, samples the limit laws of its scaled version to
//! pick Wasserstein-ball radii (and hence regularization parameters) without
//! cross-validation, computes distributionally robust worst-case losses, and
//! fits the equivalent regularized estimators.
//!
//! Module map:
//! - [`norms`], [`dataset`], [`rng`], [`gaussian`], [`estimating`]: shared
//!   domain types.
//! - [`profile`]: the profile function `R_n(theta)` (closed forms and duals).
//! - [`limits`]: limit-law samplers behind a name-keyed registry, quantiles,
//!   and the closed-form high-dimensional tuning rule.
//! - [`worstcase`]: worst-case expected losses over a transport ball.
//! - [`solvers`]: square-root lasso, penalized logistic regression, OLS,
//!   and a cross-validation baseline, behind a registry.
//! - [`pipeline`]: radius selection procedures, synthetic data generation,
//!   and the replication/experiment harness.
//! - [`report`]: stable JSON emission for all result types.
//! - [`cli`]: the `rwpi` command-line surface.

pub mod cli;
pub mod cost;
pub mod dataset;
pub mod error;
pub mod estimating;
pub mod gaussian;
pub mod limits;
pub mod norms;
pub mod opt;
pub mod pipeline;
pub mod profile;
pub mod report;
pub mod rng;
pub mod solvers;
pub mod worstcase;

pub use dataset::{Dataset, TaskKind};
pub use error::{Error, Result};
pub use norms::Exponent;
pub use rng::RngSeed;
