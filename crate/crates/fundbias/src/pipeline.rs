//! End-to-end analysis: daily p-value series per indicator, Q-Q data for
//! the bias shape, and log-normal vs GPD-1 vs GPD-2 model comparison.

use crate::distributions::{DistError, FitReport, GpdFitOptions, GpdParams, LogNormalParams};
use crate::gof::{gof_test, BootstrapConfig, GofError, GofMethod, GofResult};
use crate::ingest::{CrossSection, Indicator, IndicatorPanel, PanelError};
use crate::rng::derive_seed;
use crate::sampling::{quantile_subsample, SamplingError, SamplingProtocol, SignFilter};
use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("no analyzable days for ({indicator}, {sign}); first skip reason: {first_reason}")]
    NoAnalyzableDays {
        indicator: Indicator,
        sign: SignFilter,
        first_reason: String,
    },
    #[error("cross-section too small: need at least {need} values, got {got}")]
    SectionTooSmall { need: usize, got: usize },
    #[error("subsample size must satisfy 10 <= k <= {n}, got {k}")]
    BadSubsampleSize { k: usize, n: usize },
    #[error(transparent)]
    Panel(#[from] PanelError),
    #[error(transparent)]
    Gof(#[from] GofError),
    #[error(transparent)]
    Dist(#[from] DistError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// All three test results for one analyzed day.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DayResult {
    pub date: NaiveDate,
    pub ks: GofResult,
    pub chi2: GofResult,
    pub ad: GofResult,
}

impl DayResult {
    pub fn result(&self, method: GofMethod) -> &GofResult {
        match method {
            GofMethod::Ks => &self.ks,
            GofMethod::Chi2 => &self.chi2,
            GofMethod::Ad => &self.ad,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedDay {
    pub date: NaiveDate,
    pub reason: String,
}

/// Per-method location of the lowest p-value over the analyzed days.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MethodMinimum {
    pub method: GofMethod,
    pub date: NaiveDate,
    pub p_value: f64,
}

/// Daily p-value time series for one (indicator, sign) pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PValueSeries {
    pub indicator: Indicator,
    pub sign: SignFilter,
    pub entries: Vec<DayResult>,
    pub skipped: Vec<SkippedDay>,
    pub minima: Vec<MethodMinimum>,
}

impl PValueSeries {
    /// Recomputes the minima from the entries; ties resolve to the earliest
    /// date.
    pub fn recompute_minima(&self) -> Vec<MethodMinimum> {
        GofMethod::ALL
            .iter()
            .filter_map(|&method| {
                self.entries
                    .iter()
                    .map(|day| (day.date, day.result(method).p_value))
                    .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)))
                    .map(|(date, p_value)| MethodMinimum {
                        method,
                        date,
                        p_value,
                    })
            })
            .collect()
    }
}

/// Runs the full per-day protocol for one indicator: cross-section,
/// quantile subsample of `protocol.quantile_points` points, then all three
/// bootstrap tests. Days failing any precondition are recorded as skipped
/// with the reason. Per-day bootstrap seeds derive from
/// (boot.seed, date, indicator, sign, method).
pub fn daily_bias_series(
    panel: &IndicatorPanel,
    indicator: Indicator,
    sign: SignFilter,
    protocol: &SamplingProtocol,
    boot: &BootstrapConfig,
) -> Result<PValueSeries, PipelineError> {
    let protocol = SamplingProtocol { sign, ..*protocol };
    protocol.validate()?;
    boot.validate()?;
    let dates = panel.dates_for(indicator);
    if dates.is_empty() {
        return Err(PipelineError::Panel(PanelError::NoData {
            date: NaiveDate::from_ymd_opt(1970, 1, 1).unwrap(),
            indicator,
        }));
    }

    let outcomes: Vec<Result<DayResult, SkippedDay>> = dates
        .par_iter()
        .map(|&date| analyze_day(panel, date, indicator, &protocol, boot))
        .collect();

    let mut entries = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(day) => entries.push(day),
            Err(skip) => skipped.push(skip),
        }
    }
    if entries.is_empty() {
        let first_reason = skipped
            .first()
            .map(|s| s.reason.clone())
            .unwrap_or_default();
        return Err(PipelineError::NoAnalyzableDays {
            indicator,
            sign,
            first_reason,
        });
    }
    let mut series = PValueSeries {
        indicator,
        sign,
        entries,
        skipped,
        minima: Vec::new(),
    };
    series.minima = series.recompute_minima();
    Ok(series)
}

fn analyze_day(
    panel: &IndicatorPanel,
    date: NaiveDate,
    indicator: Indicator,
    protocol: &SamplingProtocol,
    boot: &BootstrapConfig,
) -> Result<DayResult, SkippedDay> {
    let skip = |reason: String| SkippedDay { date, reason };
    let section = panel
        .cross_section(date, indicator, protocol)
        .map_err(|e| skip(e.to_string()))?;
    let subsample = quantile_subsample(&section.values, protocol.quantile_points)
        .map_err(|e| skip(e.to_string()))?;
    let mut results = Vec::with_capacity(3);
    for method in GofMethod::ALL {
        let label = format!("day/{date}/{indicator}/{}/{method}", protocol.sign);
        let day_boot = BootstrapConfig {
            replicates: boot.replicates,
            seed: derive_seed(boot.seed, &label, 0),
        };
        let res = gof_test(&subsample, method, &day_boot).map_err(|e| skip(format!("{method}: {e}")))?;
        results.push(res);
    }
    Ok(DayResult {
        date,
        ks: results[0],
        chi2: results[1],
        ad: results[2],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QQPoint {
    pub theoretical: f64,
    pub empirical: f64,
}

/// Q-Q data in natural units: empirical quantiles of the section against
/// quantiles of the log-normal fitted to the full section, at probabilities
/// (i − 0.5)/k. On log-log axes a log-normal sample tracks the diagonal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QQData {
    pub points: Vec<QQPoint>,
    pub fitted: LogNormalParams,
}

pub fn qq_plot_data(section: &CrossSection, k: usize) -> Result<QQData, PipelineError> {
    let n = section.values.len();
    if k < 10 || k > n {
        return Err(PipelineError::BadSubsampleSize { k, n });
    }
    let fitted = LogNormalParams::fit(&section.values)?.params;
    let empirical = quantile_subsample(&section.values, k)?;
    let points = empirical
        .into_iter()
        .enumerate()
        .map(|(i, e)| {
            let p = (i as f64 + 0.5) / k as f64;
            Ok(QQPoint {
                theoretical: fitted.quantile(p)?,
                empirical: e,
            })
        })
        .collect::<Result<Vec<_>, DistError>>()?;
    Ok(QQData { points, fitted })
}

/// Per-model Akaike information criterion, 2k − 2·log-likelihood with
/// k = 2, 3, 4 free parameters respectively.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelAic {
    pub lognormal: f64,
    pub gpd1: f64,
    pub gpd2: f64,
}

/// Side-by-side fits of the three candidate laws on the same section.
/// No winner is declared; the caller compares.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeComparison {
    pub lognormal: FitReport<LogNormalParams>,
    pub gpd1: FitReport<GpdParams>,
    pub gpd2: FitReport<GpdParams>,
    pub aic: ModelAic,
}

pub fn fit_bias_shape(section: &CrossSection) -> Result<ShapeComparison, PipelineError> {
    let n = section.values.len();
    if n < 50 {
        return Err(PipelineError::SectionTooSmall { need: 50, got: n });
    }
    let lognormal = LogNormalParams::fit(&section.values)?;
    let gpd1 = GpdParams::fit(&section.values, &GpdFitOptions::gpd1())?;
    // seed the free-alpha search with the constrained optimum so the nested
    // model can never win
    let mut gpd2_opts = GpdFitOptions::gpd2();
    gpd2_opts.extra_starts.push(gpd1.params);
    let gpd2 = GpdParams::fit(&section.values, &gpd2_opts)?;
    let aic = ModelAic {
        lognormal: 2.0 * 2.0 - 2.0 * lognormal.log_likelihood,
        gpd1: 2.0 * 3.0 - 2.0 * gpd1.log_likelihood,
        gpd2: 2.0 * 4.0 - 2.0 * gpd2.log_likelihood,
    };
    Ok(ShapeComparison {
        lognormal,
        gpd1,
        gpd2,
        aic,
    })
}
