//! Indicator-panel loading and daily cross-section slicing.
//!
//! Panels are long-format CSV with the exact header
//! `date,company,indicator,value`: ISO-8601 dates, UTF-8, `\n` or `\r\n`
//! line endings, decimal point, no thousands separators, no quoting.

use crate::sampling::{magnitude_filter, SamplingProtocol, SignFilter};
use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

const CSV_HEADER: &str = "date,company,indicator,value";

#[derive(Debug, Error)]
pub enum PanelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("bad header: expected '{CSV_HEADER}', got '{found}'")]
    BadHeader { found: String },
    #[error("duplicate key ({date}, {company}, {indicator})")]
    DuplicateKey {
        date: NaiveDate,
        company: String,
        indicator: Indicator,
    },
    #[error("no data for ({date}, {indicator})")]
    NoData { date: NaiveDate, indicator: Indicator },
    #[error("empty cross-section for ({date}, {indicator}, {sign}) after filtering")]
    EmptyAfterFilter {
        date: NaiveDate,
        indicator: Indicator,
        sign: SignFilter,
    },
    #[error("indicator {0} has no negative branch (only cash-flow ratios are sign-split)")]
    NoNegativeBranch(Indicator),
    #[error(transparent)]
    Protocol(#[from] crate::sampling::SamplingError),
}

/// The seven fundamental indicators: price-to-earnings, forward
/// price-to-earnings, price-to-book, and the four cash-based ratios
/// (operating, investing, financing cash flow and year-end cash
/// equivalents).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Indicator {
    Pe,
    Pfe,
    Pb,
    Poc,
    Pic,
    Pfc,
    Pce,
}

impl Indicator {
    pub const ALL: [Indicator; 7] = [
        Indicator::Pe,
        Indicator::Pfe,
        Indicator::Pb,
        Indicator::Poc,
        Indicator::Pic,
        Indicator::Pfc,
        Indicator::Pce,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Indicator::Pe => "PE",
            Indicator::Pfe => "PFE",
            Indicator::Pb => "PB",
            Indicator::Poc => "POC",
            Indicator::Pic => "PIC",
            Indicator::Pfc => "PFC",
            Indicator::Pce => "PCE",
        }
    }

    /// Cash-flow ratios are analyzed as separate positive and negative
    /// branches; the others only have a positive branch.
    pub fn splits_sign(&self) -> bool {
        matches!(self, Indicator::Poc | Indicator::Pic | Indicator::Pfc)
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "PE" => Ok(Indicator::Pe),
            "PFE" => Ok(Indicator::Pfe),
            "PB" => Ok(Indicator::Pb),
            "POC" => Ok(Indicator::Poc),
            "PIC" => Ok(Indicator::Pic),
            "PFC" => Ok(Indicator::Pfc),
            "PCE" => Ok(Indicator::Pce),
            other => Err(format!(
                "unknown indicator '{other}' (expected PE | PFE | PB | POC | PIC | PFC | PCE)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub date: NaiveDate,
    pub company: String,
    pub indicator: Indicator,
    pub value: f64,
}

/// Long-format table of (date, company, indicator, value) observations with
/// unique keys.
#[derive(Debug, Clone, PartialEq)]
pub struct IndicatorPanel {
    rows: Vec<Observation>,
}

/// Row accounting for a cross-section:
/// raw = retained + dropped_cap + dropped_sign + dropped_zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SectionCounts {
    pub raw: usize,
    pub retained: usize,
    pub dropped_cap: usize,
    pub dropped_sign: usize,
    pub dropped_zero: usize,
}

/// One day's filtered sample for one indicator; the unit of testing.
/// Values are strictly positive (the negative branch is sign-flipped).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossSection {
    pub date: NaiveDate,
    pub indicator: Indicator,
    pub sign: SignFilter,
    pub values: Vec<f64>,
    pub counts: SectionCounts,
}

impl IndicatorPanel {
    /// Builds a panel from rows, rejecting duplicate
    /// (date, company, indicator) keys.
    pub fn from_rows(rows: Vec<Observation>) -> Result<Self, PanelError> {
        let mut seen = HashSet::with_capacity(rows.len());
        for row in &rows {
            if !seen.insert((row.date, row.indicator, row.company.clone())) {
                return Err(PanelError::DuplicateKey {
                    date: row.date,
                    company: row.company.clone(),
                    indicator: row.indicator,
                });
            }
        }
        Ok(Self { rows })
    }

    pub fn load_csv(path: &Path) -> Result<Self, PanelError> {
        let text = std::fs::read_to_string(path).map_err(|source| PanelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_csv(&text)
    }

    pub fn parse_csv(text: &str) -> Result<Self, PanelError> {
        let mut lines = text.lines().enumerate();
        let header = match lines.next() {
            Some((_, h)) => h,
            None => return Err(PanelError::BadHeader { found: String::new() }),
        };
        if header != CSV_HEADER {
            return Err(PanelError::BadHeader {
                found: header.to_string(),
            });
        }
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let line_no = idx + 1; // 1-based, header is line 1
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(PanelError::Parse {
                    line: line_no,
                    message: format!("expected 4 fields, got {}", fields.len()),
                });
            }
            let date = NaiveDate::parse_from_str(fields[0], "%Y-%m-%d").map_err(|e| {
                PanelError::Parse {
                    line: line_no,
                    message: format!("bad date '{}': {e}", fields[0]),
                }
            })?;
            if fields[1].is_empty() {
                return Err(PanelError::Parse {
                    line: line_no,
                    message: "empty company field".to_string(),
                });
            }
            let indicator = Indicator::from_str(fields[2]).map_err(|e| PanelError::Parse {
                line: line_no,
                message: e,
            })?;
            let value: f64 = fields[3].parse().map_err(|_| PanelError::Parse {
                line: line_no,
                message: format!("bad value '{}'", fields[3]),
            })?;
            if !value.is_finite() {
                return Err(PanelError::Parse {
                    line: line_no,
                    message: format!("non-finite value '{}'", fields[3]),
                });
            }
            rows.push(Observation {
                date,
                company: fields[1].to_string(),
                indicator,
                value,
            });
        }
        Self::from_rows(rows)
    }

    pub fn write_csv(&self, path: &Path) -> Result<(), PanelError> {
        let mut out = String::with_capacity(self.rows.len() * 32);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                row.date.format("%Y-%m-%d"),
                row.company,
                row.indicator,
                row.value
            ));
        }
        let mut file = std::fs::File::create(path).map_err(|source| PanelError::Io {
            path: path.display().to_string(),
            source,
        })?;
        file.write_all(out.as_bytes()).map_err(|source| PanelError::Io {
            path: path.display().to_string(),
            source,
        })
    }

    pub fn rows(&self) -> &[Observation] {
        &self.rows
    }

    /// Distinct indicators present, in canonical order.
    pub fn indicators(&self) -> Vec<Indicator> {
        Indicator::ALL
            .into_iter()
            .filter(|ind| self.rows.iter().any(|r| r.indicator == *ind))
            .collect()
    }

    /// Sorted distinct dates carrying at least one row for `indicator`.
    pub fn dates_for(&self, indicator: Indicator) -> Vec<NaiveDate> {
        let mut dates: Vec<NaiveDate> = self
            .rows
            .iter()
            .filter(|r| r.indicator == indicator)
            .map(|r| r.date)
            .collect();
        dates.sort();
        dates.dedup();
        dates
    }

    /// Applies the protocol's magnitude cap and sign selection to one day's
    /// values. For indicators without a negative branch, and under
    /// `SignFilter::All`, negative values are dropped (the log-normal null
    /// needs positive support) and show up in `dropped_sign`.
    pub fn cross_section(
        &self,
        date: NaiveDate,
        indicator: Indicator,
        protocol: &SamplingProtocol,
    ) -> Result<CrossSection, PanelError> {
        protocol.validate()?;
        if protocol.sign == SignFilter::Negative && !indicator.splits_sign() {
            return Err(PanelError::NoNegativeBranch(indicator));
        }
        let raw: Vec<f64> = self
            .rows
            .iter()
            .filter(|r| r.indicator == indicator && r.date == date)
            .map(|r| r.value)
            .collect();
        if raw.is_empty() {
            return Err(PanelError::NoData { date, indicator });
        }
        let capped = magnitude_filter(&raw, protocol.magnitude_cap);
        let dropped_cap = raw.len() - capped.len();

        let split = crate::sampling::sign_split(&capped);
        let (values, dropped_sign) = match protocol.sign {
            SignFilter::Positive | SignFilter::All => {
                let dropped = split.negative.len();
                (split.positive, dropped)
            }
            SignFilter::Negative => {
                let dropped = split.positive.len();
                (split.negative, dropped)
            }
        };
        let counts = SectionCounts {
            raw: raw.len(),
            retained: values.len(),
            dropped_cap,
            dropped_sign,
            dropped_zero: split.zeros,
        };
        if values.is_empty() {
            return Err(PanelError::EmptyAfterFilter {
                date,
                indicator,
                sign: protocol.sign,
            });
        }
        Ok(CrossSection {
            date,
            indicator,
            sign: protocol.sign,
            values,
            counts,
        })
    }
}
