use std::collections::BTreeMap;

use chrono::{Datelike, Duration, NaiveDate};
use serde::{Deserialize, Serialize};

use super::{IngestError, PricePoint, PriceSeries, RawPriceRecord, WeeklyPriceSummary};

/// How missing weeks inside the requested year range are handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapPolicy {
    /// Fill interior gaps by linear interpolation; trim leading/trailing gaps.
    #[default]
    Interpolate,
    /// Keep only the longest run of consecutive weeks (the latest run on ties).
    DropLeadingTrailing,
}

/// Summarises one crop's prices per week across regions.
///
/// Statistics are computed over the sorted price list, so the result does not
/// depend on record order.
pub fn aggregate_weekly(
    records: &[RawPriceRecord],
    crop: &str,
) -> Result<Vec<WeeklyPriceSummary>, IngestError> {
    let mut by_week: BTreeMap<NaiveDate, Vec<f64>> = BTreeMap::new();
    for r in records {
        if !r.commodity.trim().eq_ignore_ascii_case(crop.trim()) {
            continue;
        }
        if let Some(p) = r.retail_price {
            by_week.entry(r.week_date).or_default().push(p);
        }
    }
    if by_week.is_empty() {
        return Err(IngestError::EmptyResult(crop.to_string()));
    }
    Ok(by_week
        .into_iter()
        .map(|(week_date, mut prices)| {
            prices.sort_by(f64::total_cmp);
            summarise(week_date, &prices)
        })
        .collect())
}

fn summarise(week_date: NaiveDate, sorted: &[f64]) -> WeeklyPriceSummary {
    let n = sorted.len();
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
    };
    let mean = sorted.iter().sum::<f64>() / n as f64;
    WeeklyPriceSummary {
        week_date,
        max_price: sorted[n - 1],
        min_price: sorted[0],
        modal_price: mode(sorted),
        median_price: median,
        // rounding can push a mean of identical values one ulp outside
        mean_price: mean.clamp(sorted[0], sorted[n - 1]),
        region_count: n,
    }
}

/// Most frequent value of a sorted slice; the smallest one wins ties.
fn mode(sorted: &[f64]) -> f64 {
    let mut best = (sorted[0], 0usize);
    let mut i = 0;
    while i < sorted.len() {
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            j += 1;
        }
        if j - i > best.1 {
            best = (sorted[i], j - i);
        }
        i = j;
    }
    best.0
}

/// Turns weekly summaries into a gap-free series of mean prices within
/// `year_range` (inclusive).
pub fn build_price_series(
    crop: &str,
    summaries: &[WeeklyPriceSummary],
    year_range: (i32, i32),
    gap_policy: GapPolicy,
) -> Result<PriceSeries, IngestError> {
    let (start, end) = year_range;
    if start > end {
        return Err(IngestError::YearRange { start, end });
    }
    let mut kept: Vec<(NaiveDate, f64)> = summaries
        .iter()
        .filter(|s| (start..=end).contains(&s.week_date.year()))
        .map(|s| (s.week_date, s.mean_price))
        .collect();
    kept.sort_by_key(|(d, _)| *d);
    kept.dedup_by_key(|(d, _)| *d);
    let Some(&(anchor, _)) = kept.first() else {
        return Err(IngestError::EmptySeries { start, end });
    };

    // position on the weekly grid for each present week
    let mut slots = Vec::with_capacity(kept.len());
    for &(date, price) in &kept {
        let days = (date - anchor).num_days();
        if days % 7 != 0 {
            return Err(IngestError::OffGrid { date, anchor });
        }
        slots.push(((days / 7) as usize, price));
    }

    let points = match gap_policy {
        GapPolicy::Interpolate => interpolate(anchor, &slots),
        GapPolicy::DropLeadingTrailing => longest_run(anchor, &slots),
    };
    PriceSeries::with_year_range(crop, points, year_range)
}

fn week(anchor: NaiveDate, slot: usize) -> NaiveDate {
    anchor + Duration::days(7 * slot as i64)
}

fn interpolate(anchor: NaiveDate, slots: &[(usize, f64)]) -> Vec<PricePoint> {
    let mut out = Vec::new();
    for (i, &(slot, price)) in slots.iter().enumerate() {
        if let Some(&(prev_slot, prev_price)) = i.checked_sub(1).map(|j| &slots[j]) {
            let span = (slot - prev_slot) as f64;
            for gap in prev_slot + 1..slot {
                let frac = (gap - prev_slot) as f64 / span;
                out.push(PricePoint {
                    week_date: week(anchor, gap),
                    price: prev_price + frac * (price - prev_price),
                });
            }
        }
        out.push(PricePoint {
            week_date: week(anchor, slot),
            price,
        });
    }
    out
}

fn longest_run(anchor: NaiveDate, slots: &[(usize, f64)]) -> Vec<PricePoint> {
    let mut best = 0..0;
    let mut run_start = 0;
    for i in 1..=slots.len() {
        if i == slots.len() || slots[i].0 != slots[i - 1].0 + 1 {
            if i - run_start >= best.len() {
                best = run_start..i;
            }
            run_start = i;
        }
    }
    slots[best]
        .iter()
        .map(|&(slot, price)| PricePoint {
            week_date: week(anchor, slot),
            price,
        })
        .collect()
}
