//! Log-normal distribution LN(μ, σ²): `ln X ~ Normal(μ, σ)`, support (0, ∞).

use super::{std_normal_cdf, std_normal_quantile, DistError, FitReport};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Parameters of a log-normal law: mean and standard deviation of the
/// log-values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogNormalParams {
    mu: f64,
    sigma: f64,
}

impl LogNormalParams {
    pub fn new(mu: f64, sigma: f64) -> Result<Self, DistError> {
        if !mu.is_finite() {
            return Err(DistError::InvalidParams(format!("mu must be finite, got {mu}")));
        }
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(DistError::InvalidParams(format!(
                "sigma must be positive and finite, got {sigma}"
            )));
        }
        Ok(Self { mu, sigma })
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Density at `x > 0`.
    pub fn pdf(&self, x: f64) -> Result<f64, DistError> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(DistError::Domain(format!(
                "log-normal density needs x > 0, got {x}"
            )));
        }
        Ok(self.ln_pdf(x).exp())
    }

    /// Log-density; `-inf` outside the support.
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if !(x > 0.0) {
            return f64::NEG_INFINITY;
        }
        let lx = x.ln();
        let z = (lx - self.mu) / self.sigma;
        -lx - self.sigma.ln() - 0.5 * (2.0 * PI).ln() - 0.5 * z * z
    }

    /// CDF Φ((ln x − μ)/σ); 0 for `x ≤ 0`.
    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        std_normal_cdf((x.ln() - self.mu) / self.sigma)
    }

    /// Quantile, `q` in (0, 1).
    pub fn quantile(&self, q: f64) -> Result<f64, DistError> {
        if !(q > 0.0 && q < 1.0) {
            return Err(DistError::Domain(format!("quantile needs q in (0,1), got {q}")));
        }
        Ok((self.mu + self.sigma * std_normal_quantile(q)).exp())
    }

    /// Draws `n` values on a ChaCha8 stream seeded with `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    /// Draws `n` values on a caller-provided stream.
    pub fn sample_with<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let z: f64 = rng.sample(StandardNormal);
                (self.mu + self.sigma * z).exp()
            })
            .collect()
    }

    /// Closed-form MLE: μ̂ is the mean of log-values, σ̂ the population
    /// standard deviation of log-values.
    pub fn fit(sample: &[f64]) -> Result<FitReport<Self>, DistError> {
        let n = sample.len();
        if n < 2 {
            return Err(DistError::TooFewSamples { need: 2, got: n });
        }
        let mut logs = Vec::with_capacity(n);
        for &x in sample {
            if !(x > 0.0) || !x.is_finite() {
                return Err(DistError::Domain(format!(
                    "log-normal fit needs positive finite values, got {x}"
                )));
            }
            logs.push(x.ln());
        }
        let nf = n as f64;
        let mu = logs.iter().sum::<f64>() / nf;
        let var = logs.iter().map(|l| (l - mu) * (l - mu)).sum::<f64>() / nf;
        if var <= 0.0 {
            return Err(DistError::DegenerateSample(
                "zero variance of log-values".to_string(),
            ));
        }
        let params = Self::new(mu, var.sqrt())?;
        let log_likelihood = sample.iter().map(|&x| params.ln_pdf(x)).sum();
        Ok(FitReport {
            params,
            log_likelihood,
            n,
            converged: true,
            iterations: 0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::E;

    fn ln01() -> LogNormalParams {
        LogNormalParams::new(0.0, 1.0).unwrap()
    }

    // Simpson oracle for the standard normal CDF, independent of the erf path
    // used by the implementation.
    fn phi_by_quadrature(z: f64) -> f64 {
        let f = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
        let n = 4000;
        let h = z / n as f64;
        let mut acc = f(0.0) + f(z);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(i as f64 * h);
        }
        0.5 + acc * h / 3.0
    }

    #[test]
    fn rejects_bad_params() {
        assert!(LogNormalParams::new(f64::NAN, 1.0).is_err());
        assert!(LogNormalParams::new(0.0, 0.0).is_err());
        assert!(LogNormalParams::new(0.0, -1.0).is_err());
        assert!(LogNormalParams::new(0.0, f64::INFINITY).is_err());
    }

    #[test]
    fn pdf_vanishes_at_support_edge() {
        let p = ln01();
        assert!(p.pdf(1e-15).unwrap() < 1e-200);
        assert!(p.pdf(0.0).is_err());
        assert!(p.pdf(-1.0).is_err());
    }

    #[test]
    fn pdf_at_median_of_standard_law() {
        // exponent vanishes at x = e^mu, so the density is 1/sqrt(2*pi)
        assert_abs_diff_eq!(ln01().pdf(1.0).unwrap(), 0.3989422804014327, epsilon = 1e-15);
    }

    #[test]
    fn pdf_matches_cdf_derivative() {
        let p = LogNormalParams::new(0.5, 2.0).unwrap();
        let x = 3.0;
        let h = 2e-5;
        let numeric = (p.cdf(x + h) - p.cdf(x - h)) / (2.0 * h);
        assert_relative_eq!(p.pdf(x).unwrap(), numeric, max_relative = 1e-6);
    }

    #[test]
    fn cdf_is_half_at_exp_mu() {
        assert_abs_diff_eq!(ln01().cdf(1.0), 0.5, epsilon = 1e-14);
        let p = LogNormalParams::new(2.0, 0.5).unwrap();
        assert_abs_diff_eq!(p.cdf(E * E), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn cdf_at_e_matches_quadrature_oracle() {
        let oracle = phi_by_quadrature(1.0);
        assert_abs_diff_eq!(oracle, 0.8413447460685429, epsilon = 1e-10);
        assert_abs_diff_eq!(ln01().cdf(E), oracle, epsilon = 1e-10);
    }

    #[test]
    fn cdf_outside_support_is_zero() {
        assert_eq!(ln01().cdf(0.0), 0.0);
        assert_eq!(ln01().cdf(-5.0), 0.0);
    }

    #[test]
    fn quantile_median_cases() {
        assert_abs_diff_eq!(ln01().quantile(0.5).unwrap(), 1.0, epsilon = 1e-12);
        let p = LogNormalParams::new(1.0, 1.0).unwrap();
        assert_abs_diff_eq!(p.quantile(0.5).unwrap(), E, epsilon = 1e-12);
    }

    #[test]
    fn quantile_matches_bisection_oracle() {
        let p = ln01();
        // bisect cdf(x) = 0.975 on the raw implementation
        let (mut lo, mut hi) = (1e-6, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p.cdf(mid) < 0.975 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let oracle = 0.5 * (lo + hi);
        assert_relative_eq!(oracle, 7.099071384231336, max_relative = 1e-10);
        assert_relative_eq!(p.quantile(0.975).unwrap(), oracle, max_relative = 1e-10);
    }

    #[test]
    fn quantile_rejects_out_of_range() {
        assert!(ln01().quantile(0.0).is_err());
        assert!(ln01().quantile(1.0).is_err());
        assert!(ln01().quantile(-0.2).is_err());
    }

    #[test]
    fn quantile_cdf_round_trip() {
        let p = LogNormalParams::new(0.3, 0.7).unwrap();
        for i in 1..100 {
            let q = i as f64 / 100.0;
            let x = p.quantile(q).unwrap();
            assert_abs_diff_eq!(p.cdf(x), q, epsilon = 1e-10);
        }
    }

    #[test]
    fn fit_rejects_degenerate_and_bad_input() {
        assert!(matches!(
            LogNormalParams::fit(&[E, E, E, E]),
            Err(DistError::DegenerateSample(_))
        ));
        assert!(matches!(
            LogNormalParams::fit(&[1.0]),
            Err(DistError::TooFewSamples { .. })
        ));
        assert!(LogNormalParams::fit(&[1.0, -2.0]).is_err());
        assert!(LogNormalParams::fit(&[1.0, 0.0]).is_err());
    }

    #[test]
    fn fit_two_point_closed_form() {
        let report = LogNormalParams::fit(&[1.0, (2.0f64).exp()]).unwrap();
        assert_abs_diff_eq!(report.params.mu(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(report.params.sigma(), 1.0, epsilon = 1e-12);
        assert!(report.converged);
        assert!(report.log_likelihood.is_finite());
    }

    #[test]
    fn fit_recovers_known_parameters() {
        let truth = LogNormalParams::new(0.3, 0.7).unwrap();
        let sample = truth.sample(10_000, 1234);
        let report = LogNormalParams::fit(&sample).unwrap();
        assert_abs_diff_eq!(report.params.mu(), 0.3, epsilon = 0.03);
        assert_abs_diff_eq!(report.params.sigma(), 0.7, epsilon = 0.03);
        // the MLE cannot be beaten by the truth on its own sample
        let ll_truth: f64 = sample.iter().map(|&x| truth.ln_pdf(x)).sum();
        assert!(report.log_likelihood >= ll_truth);
    }

    #[test]
    fn sample_is_deterministic_per_seed() {
        let p = ln01();
        assert_eq!(p.sample(5, 99), p.sample(5, 99));
        assert_ne!(p.sample(5, 99), p.sample(5, 100));
    }

    #[test]
    fn sample_log_moments_converge() {
        let p = ln01();
        let xs = p.sample(100_000, 42);
        let mean_log = xs.iter().map(|x| x.ln()).sum::<f64>() / xs.len() as f64;
        assert!(mean_log.abs() < 0.02, "mean of logs {mean_log}");
    }

    #[test]
    fn sample_stays_in_ten_sigma_range() {
        let p = LogNormalParams::new(5.0, 0.1).unwrap();
        let xs = p.sample(1000, 7);
        let (lo, hi) = ((4.0f64).exp(), (6.0f64).exp());
        assert!(xs.iter().all(|&x| x > lo && x < hi));
    }
}
