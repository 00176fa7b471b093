//! Probability-law primitives: the log-normal family and the four-parameter
//! generalized Pareto family, each with density, CDF, quantile, seeded
//! sampling, and maximum-likelihood fitting.

mod gpd;
mod lognormal;
pub(crate) mod optim;

pub use gpd::{GpdFitOptions, GpdParams};
pub use lognormal::LogNormalParams;

use serde::{Deserialize, Serialize};
use std::f64::consts::SQRT_2;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DistError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("sample too small: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("degenerate sample: {0}")]
    DegenerateSample(String),
}

/// Outcome of a maximum-likelihood fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitReport<P> {
    pub params: P,
    pub log_likelihood: f64,
    pub n: usize,
    pub converged: bool,
    pub iterations: usize,
}

/// Standard normal CDF.
pub(crate) fn std_normal_cdf(z: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-z / SQRT_2)
}

/// Standard normal quantile, `p` in (0, 1).
pub(crate) fn std_normal_quantile(p: f64) -> f64 {
    -SQRT_2 * statrs::function::erf::erfc_inv(2.0 * p)
}
