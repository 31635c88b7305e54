//! Comma-separated renderings of leaderboards, CV reports and plot data.

use super::{CvReport, Leaderboard, MetricReport};
use crate::forecast::Forecast;
use crate::ingest::PriceSeries;

pub const TABLE_HEADER: [&str; 4] = ["Models", "RMSE", "RMSEP", "MAPE"];
pub const PLOT_HEADER: &str = "week_date,actual,predicted";

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), |v| format!("{v:.4}"))
}

fn render(rows: impl IntoIterator<Item = (String, MetricReport)>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(TABLE_HEADER).expect("in-memory write");
    for (name, r) in rows {
        w.write_record([name, cell(r.rmse), cell(r.rmsep), cell(r.mape)])
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

/// One row per model: `Models,RMSE,RMSEP,MAPE`. Failed rows show `NA`.
pub fn leaderboard_csv(board: &Leaderboard) -> String {
    render(board.rows.iter().map(|r| (r.label.clone(), r.clone())))
}

/// One row per model and fold, labelled `<model>_Split<i>`.
pub fn cv_csv(reports: &[CvReport]) -> String {
    render(reports.iter().flat_map(|r| {
        r.per_fold.iter().enumerate().map(move |(i, f)| {
            let fold = f.split.map_or(i + 1, |s| s.fold_index);
            (format!("{}_Split{fold}", r.label), f.clone())
        })
    }))
}

/// `week_date,actual,predicted` over the history and the forecast window;
/// cells without a value are left empty.
pub fn plot_data_csv(history: &PriceSeries, forecast: Option<&Forecast>) -> String {
    use std::collections::BTreeMap;
    let mut rows: BTreeMap<chrono::NaiveDate, (Option<f64>, Option<f64>)> = BTreeMap::new();
    for p in history.points() {
        rows.entry(p.week_date).or_default().0 = Some(p.price);
    }
    for p in forecast.map(|f| f.points.as_slice()).unwrap_or_default() {
        rows.entry(p.week_date).or_default().1 = Some(p.price);
    }
    let fmt = |v: Option<f64>| v.map(crate::ingest::format_price).unwrap_or_default();
    let mut out = String::from(PLOT_HEADER);
    out.push('\n');
    for (date, (actual, predicted)) in rows {
        out.push_str(&format!("{},{},{}\n", date.format("%Y-%m-%d"), fmt(actual), fmt(predicted)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluate::{evaluate_all_detailed, rolling_cross_validate};
    use crate::forecast::{ModelSpec, SarimaxOrder};
    use chrono::NaiveDate;

    fn series() -> PriceSeries {
        let values: Vec<f64> = (0..30).map(|t| 10.0 + (t % 5) as f64).collect();
        PriceSeries::from_values("Maize", NaiveDate::from_ymd_opt(2013, 1, 7).unwrap(), &values).unwrap()
    }

    #[test]
    fn leaderboard_layout() {
        let specs = [
            ModelSpec::Naive,
            ModelSpec::Arima {
                order: SarimaxOrder::arima(1, 0, 0),
                constant: true,
            },
            ModelSpec::holt_winters_additive(52),
        ];
        let eval = evaluate_all_detailed(&series(), &specs, 0.2).unwrap();
        let text = leaderboard_csv(&eval.leaderboard);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "Models,RMSE,RMSEP,MAPE");
        assert_eq!(lines.len(), 4);
        assert!(lines[2].starts_with("\"ARIMA(1,0,0)\","));
        assert!(lines[3].ends_with("NA,NA,NA"));
    }

    #[test]
    fn cv_layout() {
        let reports = rolling_cross_validate(&series(), &[ModelSpec::Naive], 4).unwrap();
        let text = cv_csv(&reports);
        let names: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
        assert_eq!(names, ["Naive_Split1", "Naive_Split2", "Naive_Split3", "Naive_Split4"]);
    }

    #[test]
    fn plot_rows_mark_absent_cells() {
        let s = series();
        let (train, _) = crate::series::train_test_split(&s, 0.2).unwrap();
        let eval = evaluate_all_detailed(&s, &[ModelSpec::Naive], 0.2).unwrap();
        let text = plot_data_csv(&s, eval.forecasts[0].as_ref());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), s.len() + 1);
        assert!(lines[1].ends_with(','), "train rows have no prediction: {}", lines[1]);
        let first_test = lines[train.len() + 1];
        assert_eq!(first_test.split(',').count(), 3);
        assert!(!first_test.ends_with(','));
        let only_history = plot_data_csv(&train, None);
        assert_eq!(only_history.lines().count(), train.len() + 1);
    }
}
