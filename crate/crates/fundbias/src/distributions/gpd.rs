//! Four-parameter generalized Pareto family
//!
//!   F(x) = 1 − (1 + ((x−μ)/κ)^(1/γ))^(−α),   x > μ,
//!
//! with scale κ > 0, tail-weight exponent α > 0, shape exponent γ > 0 and
//! location μ. The survival function decays with asymptotic tail exponent
//! α/γ. Setting γ = 1, μ = 0 recovers the Lomax distribution.

use super::optim::NelderMead;
use super::{DistError, FitReport};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdParams {
    kappa: f64,
    alpha: f64,
    gamma: f64,
    mu_loc: f64,
}

/// Controls for [`GpdParams::fit`]. Any of the three parameters can be held
/// fixed; `restarts` local searches are run from the best-ranked starting
/// points and the best optimum wins.
#[derive(Debug, Clone)]
pub struct GpdFitOptions {
    pub fix_alpha: Option<f64>,
    pub fix_gamma: Option<f64>,
    pub fix_mu_loc: Option<f64>,
    pub restarts: usize,
    pub max_iterations: usize,
    /// Additional starting points, each polished by its own local search.
    pub extra_starts: Vec<GpdParams>,
}

impl Default for GpdFitOptions {
    fn default() -> Self {
        Self {
            fix_alpha: None,
            fix_gamma: None,
            fix_mu_loc: None,
            restarts: 5,
            max_iterations: 2000,
            extra_starts: Vec::new(),
        }
    }
}

impl GpdFitOptions {
    /// GPD-1 mode: tail-weight exponent held at 1.
    pub fn gpd1() -> Self {
        Self {
            fix_alpha: Some(1.0),
            ..Default::default()
        }
    }

    /// GPD-2 mode: all four parameters free.
    pub fn gpd2() -> Self {
        Self::default()
    }
}

impl GpdParams {
    pub fn new(kappa: f64, alpha: f64, gamma: f64, mu_loc: f64) -> Result<Self, DistError> {
        for (name, v) in [("kappa", kappa), ("alpha", alpha), ("gamma", gamma)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(DistError::InvalidParams(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        if !mu_loc.is_finite() {
            return Err(DistError::InvalidParams(format!(
                "mu_loc must be finite, got {mu_loc}"
            )));
        }
        Ok(Self {
            kappa,
            alpha,
            gamma,
            mu_loc,
        })
    }

    #[inline]
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    #[inline]
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    #[inline]
    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    #[inline]
    pub fn mu_loc(&self) -> f64 {
        self.mu_loc
    }

    /// Asymptotic tail exponent of the survival function.
    pub fn tail_exponent(&self) -> f64 {
        self.alpha / self.gamma
    }

    /// CDF; 0 at and below `mu_loc`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.mu_loc {
            return 0.0;
        }
        let ln_u = ((x - self.mu_loc).ln() - self.kappa.ln()) / self.gamma;
        let u = ln_u.exp();
        let l1p = if u > 1e300 { ln_u } else { u.ln_1p() };
        -(-self.alpha * l1p).exp_m1()
    }

    /// Density. At `x = mu_loc` the one-sided limit is returned: 0 for
    /// γ < 1, α/(γκ) for γ = 1, and +∞ for γ > 1.
    pub fn pdf(&self, x: f64) -> f64 {
        if x < self.mu_loc {
            return 0.0;
        }
        if x == self.mu_loc {
            return if self.gamma < 1.0 {
                0.0
            } else if self.gamma == 1.0 {
                self.alpha / (self.gamma * self.kappa)
            } else {
                f64::INFINITY
            };
        }
        self.ln_pdf(x).exp()
    }

    /// Log-density; `-inf` at and below `mu_loc`.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        let t = x - self.mu_loc;
        if !(t > 0.0) {
            return f64::NEG_INFINITY;
        }
        let ln_t = t.ln();
        let ln_u = (ln_t - self.kappa.ln()) / self.gamma;
        let u = ln_u.exp();
        let l1p = if u > 1e300 { ln_u } else { u.ln_1p() };
        self.alpha.ln() - self.gamma.ln() + ln_u - ln_t - (self.alpha + 1.0) * l1p
    }

    /// Closed-form quantile μ + κ((1−q)^(−1/α) − 1)^γ, `q` in (0, 1).
    pub fn quantile(&self, q: f64) -> Result<f64, DistError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(DistError::Domain(format!("quantile needs q in (0,1), got {q}")));
        }
        let inner = (-(-q).ln_1p() / self.alpha).exp_m1();
        Ok(self.mu_loc + self.kappa * inner.powf(self.gamma))
    }

    /// Inverse-CDF draws on a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    /// Inverse-CDF draws on a caller-provided stream.
    pub fn sample_with<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let mut u: f64 = rng.gen();
                while u <= 0.0 {
                    u = rng.gen();
                }
                self.quantile(u).expect("u in (0,1)")
            })
            .collect()
    }

    /// Maximum-likelihood fit by multi-start local search over
    /// (κ, α, γ, μ) in log/offset coordinates. The location is constrained
    /// below min(sample) − δ with δ = 10⁻⁶·(max − min) unless held fixed.
    pub fn fit(sample: &[f64], opts: &GpdFitOptions) -> Result<FitReport<Self>, DistError> {
        let n = sample.len();
        if n < 8 {
            return Err(DistError::TooFewSamples { need: 8, got: n });
        }
        if sample.iter().any(|v| !v.is_finite()) {
            return Err(DistError::Domain("sample contains non-finite values".into()));
        }
        let mut sorted = sample.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let (lo, hi) = (sorted[0], sorted[n - 1]);
        if hi <= lo {
            return Err(DistError::DegenerateSample(
                "all sample values are identical".into(),
            ));
        }
        for (name, v) in [
            ("fix_alpha", opts.fix_alpha),
            ("fix_gamma", opts.fix_gamma),
        ] {
            if let Some(v) = v {
                if !(v > 0.0) || !v.is_finite() {
                    return Err(DistError::InvalidParams(format!(
                        "{name} must be positive and finite, got {v}"
                    )));
                }
            }
        }
        let range = hi - lo;
        let upper = match opts.fix_mu_loc {
            Some(mu) => {
                if !(mu < lo) || !mu.is_finite() {
                    return Err(DistError::InvalidParams(format!(
                        "fix_mu_loc must lie below the sample minimum {lo}, got {mu}"
                    )));
                }
                mu
            }
            None => lo - 1e-6 * range,
        };

        let map = ParamMap {
            fix_alpha: opts.fix_alpha,
            fix_gamma: opts.fix_gamma,
            fix_mu_loc: opts.fix_mu_loc,
            upper,
        };
        let objective = |x: &[f64]| -> f64 {
            let p = map.unpack(x);
            let nll = -log_likelihood(&p, sample);
            if nll.is_nan() {
                f64::INFINITY
            } else {
                nll
            }
        };

        // Quantile-anchored starting points over a grid of location offsets
        // and tail weights, ranked by likelihood.
        let x50 = percentile(&sorted, 0.5);
        let x90 = percentile(&sorted, 0.9);
        let mu_candidates: Vec<f64> = match opts.fix_mu_loc {
            Some(mu) => vec![mu],
            None => [1e-4, 0.05, 0.5, 2.0]
                .iter()
                .map(|f| upper - f * range)
                .collect(),
        };
        let alpha_candidates: Vec<f64> = match opts.fix_alpha {
            Some(a) => vec![a],
            None => vec![0.5, 1.0, 2.0],
        };
        let mut starts: Vec<(f64, Vec<f64>)> = Vec::new();
        for &mu0 in &mu_candidates {
            for &a0 in &alpha_candidates {
                if let Some(p0) = quantile_matched_start(x50, x90, mu0, a0, opts.fix_gamma) {
                    let x0 = map.pack(&p0);
                    let f0 = objective(&x0);
                    if f0.is_finite() {
                        starts.push((f0, x0));
                    }
                }
            }
        }
        for p in &opts.extra_starts {
            let clamped = GpdParams {
                mu_loc: p.mu_loc.min(upper),
                ..*p
            };
            let x0 = map.pack(&clamped);
            let f0 = objective(&x0);
            if f0.is_finite() {
                starts.push((f64::NEG_INFINITY, x0)); // always kept
            }
        }
        if starts.is_empty() {
            return Err(DistError::DegenerateSample(
                "no starting point with finite likelihood".into(),
            ));
        }
        starts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        starts.truncate(opts.restarts.max(1) + opts.extra_starts.len());

        let nm = NelderMead {
            max_iterations: opts.max_iterations,
            ..Default::default()
        };
        let mut best: Option<super::optim::NmOutcome> = None;
        for (_, x0) in &starts {
            let out = nm.minimize(objective, x0);
            let better = match &best {
                Some(b) => out.f < b.f,
                None => true,
            };
            if better {
                best = Some(out);
            }
        }
        let best = best.unwrap();
        let params = map.unpack(&best.x);
        Ok(FitReport {
            params,
            log_likelihood: -best.f,
            n,
            converged: best.converged && best.f.is_finite(),
            iterations: best.iterations,
        })
    }
}

/// Total log-likelihood; `-inf` when any point falls outside the support.
/// Summation runs over fixed-size chunks so the result does not depend on
/// thread scheduling.
fn log_likelihood(p: &GpdParams, sample: &[f64]) -> f64 {
    use rayon::prelude::*;
    const CHUNK: usize = 8192;
    if sample.len() <= CHUNK {
        sample.iter().map(|&x| p.ln_pdf(x)).sum()
    } else {
        sample
            .par_chunks(CHUNK)
            .map(|c| c.iter().map(|&x| p.ln_pdf(x)).sum::<f64>())
            .collect::<Vec<_>>()
            .into_iter()
            .sum()
    }
}

/// Type-7 percentile of a sorted slice.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    let w = h - lo as f64;
    sorted[lo] + w * (sorted[hi] - sorted[lo])
}

/// Matches κ and γ to the empirical 50% and 90% quantiles given a location
/// and tail weight, using x_q = μ + κ·h(q)^γ with h(q) = (1−q)^(−1/α) − 1.
fn quantile_matched_start(
    x50: f64,
    x90: f64,
    mu0: f64,
    alpha0: f64,
    fix_gamma: Option<f64>,
) -> Option<GpdParams> {
    let h = |q: f64| (1.0 - q).powf(-1.0 / alpha0) - 1.0;
    let (t50, t90) = (x50 - mu0, x90 - mu0);
    if !(t50 > 0.0 && t90 > 0.0) {
        return None;
    }
    let gamma0 = match fix_gamma {
        Some(g) => g,
        None => {
            let g = (t90 / t50).ln() / (h(0.9) / h(0.5)).ln();
            if g.is_finite() {
                g.clamp(0.05, 20.0)
            } else {
                1.0
            }
        }
    };
    let kappa0 = t50 / h(0.5).powf(gamma0);
    if !(kappa0 > 0.0) || !kappa0.is_finite() {
        return None;
    }
    GpdParams::new(kappa0, alpha0, gamma0, mu0).ok()
}

/// Packs the free subset of (ln κ, ln α, ln γ, ψ) where μ = upper − e^ψ.
struct ParamMap {
    fix_alpha: Option<f64>,
    fix_gamma: Option<f64>,
    fix_mu_loc: Option<f64>,
    upper: f64,
}

impl ParamMap {
    fn pack(&self, p: &GpdParams) -> Vec<f64> {
        let mut x = vec![p.kappa.ln()];
        if self.fix_alpha.is_none() {
            x.push(p.alpha.ln());
        }
        if self.fix_gamma.is_none() {
            x.push(p.gamma.ln());
        }
        if self.fix_mu_loc.is_none() {
            let gap = (self.upper - p.mu_loc).max(1e-300);
            x.push(gap.ln());
        }
        x
    }

    fn unpack(&self, x: &[f64]) -> GpdParams {
        let clamp = |v: f64| v.clamp(-300.0, 300.0);
        let mut it = x.iter().copied();
        let kappa = clamp(it.next().unwrap()).exp();
        let alpha = match self.fix_alpha {
            Some(a) => a,
            None => clamp(it.next().unwrap()).exp(),
        };
        let gamma = match self.fix_gamma {
            Some(g) => g,
            None => clamp(it.next().unwrap()).exp(),
        };
        let mu_loc = match self.fix_mu_loc {
            Some(m) => m,
            None => self.upper - clamp(it.next().unwrap()).exp(),
        };
        GpdParams {
            kappa,
            alpha,
            gamma,
            mu_loc,
        }
    }
}
