//! Goodness-of-fit testing of a positive sample against a fitted log-normal
//! null: Kolmogorov–Smirnov, Pearson's χ² and Anderson–Darling statistics,
//! with parametric-bootstrap p-values that refit the parameters on every
//! replicate. Classical asymptotic p-values (valid only for a fully
//! specified null) are available separately for comparison; with estimated
//! parameters they are anticonservative.

use crate::distributions::{DistError, LogNormalParams};
use crate::rng::{derive_seed, derived_rng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;
use std::fmt;
use thiserror::Error;

/// F values are clipped into this band before taking logs in the
/// Anderson–Darling sum.
const AD_CLIP: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GofError {
    #[error("empty sample")]
    EmptySample,
    #[error("sample too small: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("sample values must be positive, got {0}")]
    NonPositiveValue(f64),
    #[error("chi-square needs at least 3 bins, got {0}")]
    TooFewBins(usize),
    #[error("chi-square needs n >= 5*bins ({need}), got {got}")]
    TooFewPerBin { need: usize, got: usize },
    #[error("bootstrap needs at least 100 replicates, got {0}")]
    TooFewReplicates(usize),
    #[error(transparent)]
    Dist(#[from] DistError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GofMethod {
    Ks,
    Chi2,
    Ad,
}

impl GofMethod {
    pub const ALL: [GofMethod; 3] = [GofMethod::Ks, GofMethod::Chi2, GofMethod::Ad];

    pub fn as_str(&self) -> &'static str {
        match self {
            GofMethod::Ks => "KS",
            GofMethod::Chi2 => "CHI2",
            GofMethod::Ad => "AD",
        }
    }
}

impl fmt::Display for GofMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for GofMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "KS" => Ok(GofMethod::Ks),
            "CHI2" => Ok(GofMethod::Chi2),
            "AD" => Ok(GofMethod::Ad),
            other => Err(format!("unknown method '{other}' (expected KS | CHI2 | AD)")),
        }
    }
}

/// Significance stars: *** below 1%, ** below 3%, * below 5%.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stars {
    None,
    One,
    Two,
    Three,
}

impl Stars {
    pub fn from_p_value(p: f64) -> Self {
        if p < 0.01 {
            Stars::Three
        } else if p < 0.03 {
            Stars::Two
        } else if p < 0.05 {
            Stars::One
        } else {
            Stars::None
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Stars::None => "",
            Stars::One => "*",
            Stars::Two => "**",
            Stars::Three => "***",
        }
    }
}

impl fmt::Display for Stars {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GofResult {
    pub method: GofMethod,
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
    pub stars: Stars,
}

/// Parametric-bootstrap settings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    pub replicates: usize,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn new(replicates: usize, seed: u64) -> Self {
        Self { replicates, seed }
    }

    pub fn validate(&self) -> Result<(), GofError> {
        if self.replicates < 100 {
            return Err(GofError::TooFewReplicates(self.replicates));
        }
        Ok(())
    }
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            replicates: 2000,
            seed: 0,
        }
    }
}

fn sorted_positive(sample: &[f64]) -> Result<Vec<f64>, GofError> {
    if sample.is_empty() {
        return Err(GofError::EmptySample);
    }
    for &x in sample {
        if !(x > 0.0) || !x.is_finite() {
            return Err(GofError::NonPositiveValue(x));
        }
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    Ok(sorted)
}

/// Kolmogorov–Smirnov statistic D = sup_i max(|i/n − F(x_(i))|,
/// |F(x_(i)) − (i−1)/n|) against the given log-normal null.
pub fn ks_statistic(sample: &[f64], p: &LogNormalParams) -> Result<f64, GofError> {
    let sorted = sorted_positive(sample)?;
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in sorted.iter().enumerate() {
        let f = p.cdf(x);
        let upper = ((i + 1) as f64 / n - f).abs();
        let lower = (f - i as f64 / n).abs();
        d = d.max(upper.max(lower));
    }
    Ok(d)
}

/// Pinned default bin count for [`chi2_statistic`] inside [`gof_test`]:
/// clamp(n/15, 3, 20), which gives 20 equal-probability bins at n = 300.
pub fn default_chi2_bins(n: usize) -> usize {
    (n / 15).clamp(3, 20)
}

/// Pearson χ² statistic over equal-probability bins under the null, with
/// degrees of freedom bins − 1 − 2 (two estimated parameters). Counting
/// convention: bin k holds edge_(k−1) < x ≤ edge_k.
pub fn chi2_statistic(
    sample: &[f64],
    p: &LogNormalParams,
    bins: usize,
) -> Result<(f64, usize), GofError> {
    if bins < 3 {
        return Err(GofError::TooFewBins(bins));
    }
    let sorted = sorted_positive(sample)?;
    let n = sorted.len();
    if n < 5 * bins {
        return Err(GofError::TooFewPerBin {
            need: 5 * bins,
            got: n,
        });
    }
    let mut edges = Vec::with_capacity(bins - 1);
    for j in 1..bins {
        edges.push(p.quantile(j as f64 / bins as f64)?);
    }
    let mut counts = vec![0usize; bins];
    for &x in &sorted {
        let k = edges.partition_point(|&e| e < x);
        counts[k] += 1;
    }
    let expected = n as f64 / bins as f64;
    let statistic = counts
        .iter()
        .map(|&o| {
            let d = o as f64 - expected;
            d * d / expected
        })
        .sum();
    Ok((statistic, bins - 3))
}

/// Anderson–Darling statistic
/// A² = −n − (1/n) Σ (2i−1)[ln F(x_(i)) + ln(1 − F(x_(n+1−i)))].
/// Returns the statistic and the number of F values that had to be clipped
/// away from 0 or 1 before taking logs.
pub fn ad_statistic_counting(sample: &[f64], p: &LogNormalParams) -> Result<(f64, usize), GofError> {
    let sorted = sorted_positive(sample)?;
    let n = sorted.len();
    let mut clipped = 0usize;
    let f: Vec<f64> = sorted
        .iter()
        .map(|&x| {
            let v = p.cdf(x);
            if v < AD_CLIP || v > 1.0 - AD_CLIP {
                clipped += 1;
            }
            v.clamp(AD_CLIP, 1.0 - AD_CLIP)
        })
        .collect();
    let nf = n as f64;
    let mut acc = 0.0;
    for i in 1..=n {
        acc += (2 * i - 1) as f64 * (f[i - 1].ln() + (1.0 - f[n - i]).ln());
    }
    Ok((-nf - acc / nf, clipped))
}

/// Anderson–Darling statistic; see [`ad_statistic_counting`].
pub fn ad_statistic(sample: &[f64], p: &LogNormalParams) -> Result<f64, GofError> {
    ad_statistic_counting(sample, p).map(|(a2, _)| a2)
}

fn statistic_for(sample: &[f64], p: &LogNormalParams, method: GofMethod) -> Result<f64, GofError> {
    match method {
        GofMethod::Ks => ks_statistic(sample, p),
        GofMethod::Chi2 => chi2_statistic(sample, p, default_chi2_bins(sample.len())).map(|(s, _)| s),
        GofMethod::Ad => ad_statistic(sample, p),
    }
}

/// Tests the null "the sample follows a log-normal distribution" with the
/// chosen statistic. Parameters are fitted by maximum likelihood; the
/// p-value comes from `boot.replicates` parametric-bootstrap replicates,
/// each drawn from the fitted law and refitted:
/// p = (1 + #{replicate statistic ≥ observed}) / (replicates + 1).
pub fn gof_test(sample: &[f64], method: GofMethod, boot: &BootstrapConfig) -> Result<GofResult, GofError> {
    boot.validate()?;
    let n = sample.len();
    if n < 20 {
        return Err(GofError::TooFewSamples { need: 20, got: n });
    }
    let fitted = LogNormalParams::fit(sample)?;
    let observed = statistic_for(sample, &fitted.params, method)?;

    let exceed = (0..boot.replicates)
        .into_par_iter()
        .map(|i| -> Result<u32, GofError> {
            let mut rng = derived_rng(boot.seed, "gof-replicate", i as u64);
            let replicate = fitted.params.sample_with(n, &mut rng);
            let refit = LogNormalParams::fit(&replicate)?;
            let stat = statistic_for(&replicate, &refit.params, method)?;
            Ok(u32::from(stat >= observed))
        })
        .try_reduce(|| 0u32, |a, b| Ok(a + b))?;

    let p_value = (1.0 + exceed as f64) / (boot.replicates as f64 + 1.0);
    Ok(GofResult {
        method,
        statistic: observed,
        p_value,
        n,
        stars: Stars::from_p_value(p_value),
    })
}

/// Same statistic with a classical asymptotic p-value. Valid for a fully
/// specified null only; anticonservative when the parameters were estimated
/// from the sample.
pub fn gof_test_asymptotic(sample: &[f64], method: GofMethod) -> Result<GofResult, GofError> {
    let n = sample.len();
    if n < 20 {
        return Err(GofError::TooFewSamples { need: 20, got: n });
    }
    let fitted = LogNormalParams::fit(sample)?;
    let (statistic, p_value) = match method {
        GofMethod::Ks => {
            let d = ks_statistic(sample, &fitted.params)?;
            let nf = n as f64;
            // Stephens' finite-n rescaling of the Kolmogorov limit law
            let lambda = (nf.sqrt() + 0.12 + 0.11 / nf.sqrt()) * d;
            (d, kolmogorov_survival(lambda))
        }
        GofMethod::Chi2 => {
            let (stat, dof) = chi2_statistic(sample, &fitted.params, default_chi2_bins(n))?;
            let chi = statrs::distribution::ChiSquared::new(dof as f64)
                .expect("dof >= 1 by bins >= 3");
            (stat, 1.0 - chi.cdf(stat))
        }
        GofMethod::Ad => {
            let a2 = ad_statistic(sample, &fitted.params)?;
            (a2, ad_survival(a2))
        }
    };
    Ok(GofResult {
        method,
        statistic,
        p_value,
        n,
        stars: Stars::from_p_value(p_value),
    })
}

/// Survival function of the Kolmogorov distribution,
/// Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}.
fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Upper tail of the asymptotic A² law (Marsaglia & Marsaglia's
/// approximation to the case with all parameters known).
fn ad_survival(z: f64) -> f64 {
    if z <= 0.0 {
        return 1.0;
    }
    let cdf = if z < 2.0 {
        z.powf(-0.5)
            * (-1.2337141 / z).exp()
            * (2.00012
                + (0.247105 - (0.0649821 - (0.0347962 - (0.011672 - 0.00168691 * z) * z) * z) * z) * z)
    } else {
        (-(1.0776 - (2.30695 - (0.43424 - (0.082433 - (0.008056 - 0.0003146 * z) * z) * z) * z) * z).exp())
            .exp()
    };
    (1.0 - cdf).clamp(0.0, 1.0)
}
