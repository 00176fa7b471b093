//! Sample-preparation protocol: magnitude filtering, sign splitting of
//! cash-flow ratios, and reduction to k equally spaced empirical quantiles.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SamplingError {
    #[error("empty input")]
    EmptyInput,
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
}

/// Which branch of a sign split a cross-section uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignFilter {
    Positive,
    Negative,
    All,
}

impl SignFilter {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignFilter::Positive => "positive",
            SignFilter::Negative => "negative",
            SignFilter::All => "all",
        }
    }
}

impl fmt::Display for SignFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SignFilter {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "positive" => Ok(SignFilter::Positive),
            "negative" => Ok(SignFilter::Negative),
            "all" => Ok(SignFilter::All),
            other => Err(format!("unknown sign filter '{other}' (expected positive | negative | all)")),
        }
    }
}

/// Cross-section preparation settings: |value| cap, quantile count for the
/// subsample, and the sign branch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingProtocol {
    pub magnitude_cap: f64,
    pub quantile_points: usize,
    pub sign: SignFilter,
}

impl Default for SamplingProtocol {
    fn default() -> Self {
        Self {
            magnitude_cap: 1000.0,
            quantile_points: 300,
            sign: SignFilter::All,
        }
    }
}

impl SamplingProtocol {
    pub fn validate(&self) -> Result<(), SamplingError> {
        if !(self.magnitude_cap > 0.0) || !self.magnitude_cap.is_finite() {
            return Err(SamplingError::InvalidProtocol(format!(
                "magnitude_cap must be positive and finite, got {}",
                self.magnitude_cap
            )));
        }
        if self.quantile_points < 10 {
            return Err(SamplingError::InvalidProtocol(format!(
                "quantile_points must be at least 10, got {}",
                self.quantile_points
            )));
        }
        Ok(())
    }
}

/// Keeps the values with `|v| < cap`, order preserved.
pub fn magnitude_filter(values: &[f64], cap: f64) -> Vec<f64> {
    values.iter().copied().filter(|v| v.abs() < cap).collect()
}

/// Result of [`sign_split`]: the negative branch is sign-flipped so both
/// branches carry positive-support samples; zeros are discarded and counted.
#[derive(Debug, Clone, PartialEq)]
pub struct SignSplit {
    pub positive: Vec<f64>,
    pub negative: Vec<f64>,
    pub zeros: usize,
}

pub fn sign_split(values: &[f64]) -> SignSplit {
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    let mut zeros = 0;
    for &v in values {
        if v > 0.0 {
            positive.push(v);
        } else if v < 0.0 {
            negative.push(-v);
        } else {
            zeros += 1;
        }
    }
    SignSplit {
        positive,
        negative,
        zeros,
    }
}

/// Empirical quantiles at probabilities (i − 0.5)/k for i = 1..k, with
/// linear interpolation between order statistics (the "type 7" rule:
/// position h = (n−1)p, value x_⌊h⌋ + (h−⌊h⌋)(x_⌊h⌋₊₁ − x_⌊h⌋) on the
/// sorted sample). Output is sorted.
pub fn quantile_subsample(values: &[f64], k: usize) -> Result<Vec<f64>, SamplingError> {
    if values.is_empty() || k == 0 {
        return Err(SamplingError::EmptyInput);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = sorted.len();
    let mut out = Vec::with_capacity(k);
    for i in 1..=k {
        let p = (i as f64 - 0.5) / k as f64;
        let h = (n - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = (lo + 1).min(n - 1);
        let w = h - lo as f64;
        out.push(sorted[lo] + w * (sorted[hi] - sorted[lo]));
    }
    Ok(out)
}
