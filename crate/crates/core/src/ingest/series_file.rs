use chrono::NaiveDate;

use super::{IngestError, PricePoint, PriceSeries};

pub const SERIES_HEADER: &str = "week_date,mean_price";

/// Formats a price with at most six decimals and no trailing zeros.
pub fn format_price(v: f64) -> String {
    let s = format!("{v:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.to_string()
    }
}

/// Renders the canonical `week_date,mean_price` file with ISO dates.
pub fn write_series_csv(series: &PriceSeries) -> String {
    let mut out = String::with_capacity(24 * (series.len() + 1));
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for p in series.points() {
        out.push_str(&p.week_date.format("%Y-%m-%d").to_string());
        out.push(',');
        out.push_str(&format_price(p.price));
        out.push('\n');
    }
    out
}

pub fn read_series_csv(crop: &str, text: &str) -> Result<PriceSeries, IngestError> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    match lines.next() {
        Some(h) if h.trim() == SERIES_HEADER => {}
        _ => return Err(IngestError::Malformed(format!("expected header `{SERIES_HEADER}`"))),
    }
    let mut points = Vec::new();
    for (i, line) in lines.enumerate() {
        let bad = || IngestError::Malformed(format!("line {}: `{line}`", i + 2));
        let (date, price) = line.split_once(',').ok_or_else(bad)?;
        let week_date = NaiveDate::parse_from_str(date.trim(), "%Y-%m-%d").map_err(|_| bad())?;
        let price = price.trim().parse::<f64>().map_err(|_| bad())?;
        points.push(PricePoint { week_date, price });
    }
    PriceSeries::new(crop, points)
}
