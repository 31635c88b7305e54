//! Ingestion of multi-region retail price exports.
//!
//! Raw exports carry one row per (region, week, commodity). They are parsed
//! into [`RawPriceRecord`]s, summarised per week across regions with
//! [`aggregate_weekly`], and turned into a gap-free weekly [`PriceSeries`]
//! with [`build_price_series`].

mod aggregate;
mod parse;
mod series_file;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use aggregate::{aggregate_weekly, build_price_series, GapPolicy};
pub use parse::{parse_raw_csv, ColumnMap, ParseOutcome, RowError};
pub use series_file::{format_price, read_series_csv, write_series_csv, SERIES_HEADER};

/// Date format used by the raw exports.
pub const RAW_DATE_FORMAT: &str = "%d-%m-%Y";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IngestError {
    #[error("column `{0}` not found in header")]
    MissingColumn(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("no priced records for crop `{0}`")]
    EmptyResult(String),
    #[error("no weeks with prices inside {start}..={end}")]
    EmptySeries { start: i32, end: i32 },
    #[error("week {date} has non-positive price {price}")]
    NonPositive { date: NaiveDate, price: f64 },
    #[error("week {date} is not on the weekly grid starting {anchor}")]
    OffGrid { date: NaiveDate, anchor: NaiveDate },
    #[error("invalid year range {start}..={end}")]
    YearRange { start: i32, end: i32 },
    #[error("series dates must increase in steps of exactly 7 days (at {0})")]
    Spacing(NaiveDate),
}

/// One row of a raw export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawPriceRecord {
    pub region: String,
    pub week_date: NaiveDate,
    pub commodity: String,
    pub variety: Option<String>,
    pub unit: Option<String>,
    /// ₹/kg. `None` when the export cell was blank or a sentinel.
    pub retail_price: Option<f64>,
}

/// Cross-region statistics for one crop and one week.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyPriceSummary {
    pub week_date: NaiveDate,
    pub max_price: f64,
    pub min_price: f64,
    pub modal_price: f64,
    pub median_price: f64,
    pub mean_price: f64,
    pub region_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub week_date: NaiveDate,
    pub price: f64,
}

/// A weekly, strictly positive, gap-free mean price series for one crop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    crop: String,
    points: Vec<PricePoint>,
    year_range: (i32, i32),
}

impl PriceSeries {
    /// Validates weekly spacing and positivity. An empty point list is rejected.
    pub fn new(crop: impl Into<String>, points: Vec<PricePoint>) -> Result<Self, IngestError> {
        let first = points.first().ok_or(IngestError::EmptySeries {
            start: 0,
            end: 0,
        })?;
        let last = points.last().expect("nonempty");
        let year_range = (
            chrono::Datelike::year(&first.week_date),
            chrono::Datelike::year(&last.week_date),
        );
        Self::with_year_range(crop, points, year_range)
    }

    pub fn with_year_range(
        crop: impl Into<String>,
        points: Vec<PricePoint>,
        year_range: (i32, i32),
    ) -> Result<Self, IngestError> {
        if points.is_empty() {
            return Err(IngestError::EmptySeries {
                start: year_range.0,
                end: year_range.1,
            });
        }
        for w in points.windows(2) {
            if w[1].week_date - w[0].week_date != Duration::days(7) {
                return Err(IngestError::Spacing(w[1].week_date));
            }
        }
        if let Some(p) = points.iter().find(|p| !(p.price > 0.0) || !p.price.is_finite()) {
            return Err(IngestError::NonPositive {
                date: p.week_date,
                price: p.price,
            });
        }
        Ok(Self {
            crop: crop.into(),
            points,
            year_range,
        })
    }

    /// Builds a series of consecutive weeks starting at `start`.
    pub fn from_values(
        crop: impl Into<String>,
        start: NaiveDate,
        values: &[f64],
    ) -> Result<Self, IngestError> {
        let points = values
            .iter()
            .enumerate()
            .map(|(i, &price)| PricePoint {
                week_date: start + Duration::days(7 * i as i64),
                price,
            })
            .collect();
        Self::new(crop, points)
    }

    pub fn crop(&self) -> &str {
        &self.crop
    }

    pub fn points(&self) -> &[PricePoint] {
        &self.points
    }

    pub fn year_range(&self) -> (i32, i32) {
        self.year_range
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.price).collect()
    }

    pub fn first_date(&self) -> NaiveDate {
        self.points[0].week_date
    }

    pub fn last_date(&self) -> NaiveDate {
        self.points[self.points.len() - 1].week_date
    }

    /// Sub-series over `range` (indices). Panics if the range is empty or out of bounds.
    pub fn slice(&self, range: std::ops::Range<usize>) -> PriceSeries {
        assert!(range.start < range.end && range.end <= self.len());
        PriceSeries {
            crop: self.crop.clone(),
            points: self.points[range].to_vec(),
            year_range: self.year_range,
        }
    }
}
