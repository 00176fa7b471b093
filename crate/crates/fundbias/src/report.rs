//! Plain-text emitters for pipeline outputs: daily series and summary CSV,
//! Q-Q data CSV, shape-comparison JSON and density-overlay CSV. All columns
//! use round-trip float formatting so reruns are byte-identical.

use crate::gof::{GofMethod, Stars};
use crate::pipeline::{PValueSeries, QQData, ShapeComparison};
use crate::sampling::SignFilter;
use chrono::NaiveDate;
use serde::Serialize;

/// One row of the lowest-p-value summary table.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub indicator: String,
    pub sign: SignFilter,
    pub method: GofMethod,
    pub min_p_date: NaiveDate,
    pub min_p_value: f64,
    pub stars: Stars,
    pub analyzed_days: usize,
    pub skipped_days: usize,
}

impl SummaryRow {
    pub fn from_series(series: &PValueSeries) -> Vec<SummaryRow> {
        series
            .minima
            .iter()
            .map(|m| SummaryRow {
                indicator: series.indicator.to_string(),
                sign: series.sign,
                method: m.method,
                min_p_date: m.date,
                min_p_value: m.p_value,
                stars: Stars::from_p_value(m.p_value),
                analyzed_days: series.entries.len(),
                skipped_days: series.skipped.len(),
            })
            .collect()
    }
}

pub fn series_csv(series: &PValueSeries) -> String {
    let mut out = String::from("date,method,statistic,p_value,stars,n\n");
    for day in &series.entries {
        for method in GofMethod::ALL {
            let r = day.result(method);
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                day.date, method, r.statistic, r.p_value, r.stars, r.n
            ));
        }
    }
    out
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out =
        String::from("indicator,sign,method,min_p_date,min_p_value,stars,analyzed_days,skipped_days\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.indicator,
            r.sign,
            r.method,
            r.min_p_date,
            r.min_p_value,
            r.stars,
            r.analyzed_days,
            r.skipped_days
        ));
    }
    out
}

pub fn qq_csv(qq: &QQData) -> String {
    let mut out = String::from("theoretical_quantile,empirical_quantile\n");
    for p in &qq.points {
        out.push_str(&format!("{},{}\n", p.theoretical, p.empirical));
    }
    out
}

/// Density curves of the three fitted models on a shared grid, for external
/// plotting. The grid spans the central 99% of each fitted law.
pub fn density_overlay_csv(cmp: &ShapeComparison, points: usize) -> String {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut widen = |l: f64, h: f64| {
        lo = lo.min(l);
        hi = hi.max(h);
    };
    if let (Ok(l), Ok(h)) = (
        cmp.lognormal.params.quantile(0.005),
        cmp.lognormal.params.quantile(0.995),
    ) {
        widen(l, h);
    }
    for gpd in [&cmp.gpd1, &cmp.gpd2] {
        if let (Ok(l), Ok(h)) = (gpd.params.quantile(0.005), gpd.params.quantile(0.995)) {
            widen(l, h);
        }
    }
    let mut out = String::from("x,lognormal_pdf,gpd1_pdf,gpd2_pdf\n");
    let n = points.max(2);
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let ln_pdf = cmp.lognormal.params.pdf(x).unwrap_or(0.0);
        out.push_str(&format!(
            "{},{},{},{}\n",
            x,
            ln_pdf,
            cmp.gpd1.params.pdf(x),
            cmp.gpd2.params.pdf(x)
        ));
    }
    out
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable report type")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::LogNormalParams;
    use crate::gof::{BootstrapConfig, GofResult};
    use crate::ingest::Indicator;
    use crate::pipeline::{DayResult, MethodMinimum};

    fn day(p: f64) -> DayResult {
        let make = |method| GofResult {
            method,
            statistic: 0.5,
            p_value: p,
            n: 300,
            stars: Stars::from_p_value(p),
        };
        DayResult {
            date: NaiveDate::from_ymd_opt(2007, 1, 4).unwrap(),
            ks: make(GofMethod::Ks),
            chi2: make(GofMethod::Chi2),
            ad: make(GofMethod::Ad),
        }
    }

    fn series(p: f64) -> PValueSeries {
        let mut s = PValueSeries {
            indicator: Indicator::Pic,
            sign: SignFilter::Positive,
            entries: vec![day(p)],
            skipped: vec![],
            minima: vec![],
        };
        s.minima = s.recompute_minima();
        s
    }

    #[test]
    fn series_csv_layout() {
        let text = series_csv(&series(0.0199));
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "date,method,statistic,p_value,stars,n");
        assert_eq!(lines.next().unwrap(), "2007-01-04,KS,0.5,0.0199,**,300");
        assert_eq!(text.lines().count(), 4);
    }

    #[test]
    fn summary_rows_carry_minima_and_stars() {
        let s = series(0.004);
        let rows = SummaryRow::from_series(&s);
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[0].stars, Stars::Three);
        let text = summary_csv(&rows);
        assert!(text.contains("PIC,positive,KS,2007-01-04,0.004,***,1,0"));
    }

    #[test]
    fn qq_and_overlay_are_reproducible_byte_for_byte() {
        let truth = LogNormalParams::new(0.1, 0.9).unwrap();
        let values = truth.sample(400, 12);
        let counts = crate::ingest::SectionCounts {
            raw: 400,
            retained: 400,
            dropped_cap: 0,
            dropped_sign: 0,
            dropped_zero: 0,
        };
        let section = crate::ingest::CrossSection {
            date: NaiveDate::from_ymd_opt(2007, 1, 4).unwrap(),
            indicator: Indicator::Pic,
            sign: SignFilter::Positive,
            values,
            counts,
        };
        let qq = crate::pipeline::qq_plot_data(&section, 50).unwrap();
        assert_eq!(qq_csv(&qq), qq_csv(&qq));
        assert!(qq_csv(&qq).lines().count() == 51);
        let cmp = crate::pipeline::fit_bias_shape(&section).unwrap();
        let overlay = density_overlay_csv(&cmp, 64);
        assert_eq!(overlay, density_overlay_csv(&cmp, 64));
        assert_eq!(overlay.lines().count(), 65);
    }
}
