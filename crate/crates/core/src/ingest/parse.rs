use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{IngestError, RawPriceRecord, RAW_DATE_FORMAT};

/// Cell values treated as a missing price.
const ABSENT_SENTINELS: [&str; 4] = ["", "NA", "NR", "-"];

/// Header names for each column role. `variety` and `unit` are optional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMap {
    pub region: String,
    pub date: String,
    pub commodity: String,
    pub price: String,
    #[serde(default)]
    pub variety: Option<String>,
    #[serde(default)]
    pub unit: Option<String>,
}

impl Default for ColumnMap {
    fn default() -> Self {
        Self {
            region: "Region".into(),
            date: "Week Date".into(),
            commodity: "Commodity".into(),
            price: "Retail Price".into(),
            variety: Some("Variety".into()),
            unit: Some("Unit".into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowError {
    /// 1-based data row number (the header is row 0).
    pub row: usize,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ParseOutcome {
    pub records: Vec<RawPriceRecord>,
    pub skipped: Vec<RowError>,
    pub absent_count: usize,
}

struct Indices {
    region: usize,
    date: usize,
    commodity: usize,
    price: usize,
    variety: Option<usize>,
    unit: Option<usize>,
}

fn locate(headers: &csv::StringRecord, map: &ColumnMap) -> Result<Indices, IngestError> {
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let optional = |name: &Option<String>| -> Result<Option<usize>, IngestError> {
        name.as_deref().map(find).transpose()
    };
    Ok(Indices {
        region: find(&map.region)?,
        date: find(&map.date)?,
        commodity: find(&map.commodity)?,
        price: find(&map.price)?,
        variety: optional(&map.variety)?,
        unit: optional(&map.unit)?,
    })
}

fn parse_price(cell: &str) -> Option<f64> {
    let cell = cell.trim();
    if ABSENT_SENTINELS.iter().any(|s| cell.eq_ignore_ascii_case(s)) {
        return None;
    }
    cell.parse::<f64>()
        .ok()
        .filter(|p| p.is_finite() && *p >= 0.0)
}

/// Parses a comma-separated export with a header row.
///
/// Rows with a malformed date or a short field list are skipped and reported
/// in [`ParseOutcome::skipped`]; unparseable price cells become absent prices.
pub fn parse_raw_csv(text: &str, map: &ColumnMap) -> Result<ParseOutcome, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| IngestError::Malformed(e.to_string()))?
        .clone();
    let idx = locate(&headers, map)?;

    let mut out = ParseOutcome::default();
    for (i, row) in reader.records().enumerate() {
        let row_no = i + 1;
        let row = match row {
            Ok(r) => r,
            Err(e) => {
                out.skipped.push(RowError {
                    row: row_no,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let cell = |j: usize| row.get(j).map(str::trim);
        let optional_text = |j: Option<usize>| {
            j.and_then(cell)
                .filter(|s| !s.is_empty())
                .map(str::to_string)
        };

        let (Some(region), Some(date), Some(commodity)) =
            (cell(idx.region), cell(idx.date), cell(idx.commodity))
        else {
            out.skipped.push(RowError {
                row: row_no,
                message: "row has fewer fields than the header".into(),
            });
            continue;
        };
        let week_date = match NaiveDate::parse_from_str(date, RAW_DATE_FORMAT) {
            Ok(d) => d,
            Err(_) => {
                out.skipped.push(RowError {
                    row: row_no,
                    message: format!("malformed date `{date}` (expected DD-MM-YYYY)"),
                });
                continue;
            }
        };
        let retail_price = cell(idx.price).and_then(parse_price);
        if retail_price.is_none() {
            out.absent_count += 1;
        }
        out.records.push(RawPriceRecord {
            region: region.to_string(),
            week_date,
            commodity: commodity.to_string(),
            variety: optional_text(idx.variety),
            unit: optional_text(idx.unit),
            retail_price,
        });
    }
    Ok(out)
}
