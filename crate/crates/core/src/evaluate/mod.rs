//! Forecast accuracy: metrics, single-split leaderboards, rolling-origin
//! cross-validation and champion selection.

mod metrics;
mod tables;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::forecast::{fit, predict, Forecast, ModelSpec};
use crate::ingest::PriceSeries;
use crate::series::{rolling_cv_splits, train_test_split, SeriesError, SplitSpec};

pub use metrics::{mape, rmse, rmsep, score, Scores};
pub use tables::{cv_csv, leaderboard_csv, plot_data_csv, PLOT_HEADER, TABLE_HEADER};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("length mismatch: {actual} actual vs {predicted} predicted")]
    LengthMismatch { actual: usize, predicted: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error("every model failed for `{0}`")]
    EmptyLeaderboard(String),
    #[error("no successful cross-validation report to choose from")]
    NoChampion,
}

/// Scores for one model on one split, or the reason it could not be scored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub model: ModelSpec,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSpec>,
    /// Spec with fitted parameters filled in.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitted: Option<ModelSpec>,
    pub rmse: Option<f64>,
    pub rmsep: Option<f64>,
    pub mape: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl MetricReport {
    pub fn scores(&self) -> Option<Scores> {
        Some(Scores {
            rmse: self.rmse?,
            rmsep: self.rmsep?,
            mape: self.mape?,
        })
    }

    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitInfo {
    pub train_len: usize,
    pub test_len: usize,
    pub train_end_date: NaiveDate,
    pub test_end_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub crop: String,
    pub split: SplitInfo,
    pub rows: Vec<MetricReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvReport {
    pub crop: String,
    pub model: ModelSpec,
    pub label: String,
    pub per_fold: Vec<MetricReport>,
    /// Means over the folds that scored; `None` when every fold failed.
    pub mean_mape: Option<f64>,
    pub mean_rmse: Option<f64>,
    pub mean_rmsep: Option<f64>,
    pub failed_folds: usize,
}

impl CvReport {
    pub fn failed(&self) -> bool {
        self.mean_mape.is_none()
    }
}

/// Fits `spec` on `train` and scores its forecast of `test`.
fn run_one(spec: &ModelSpec, train: &PriceSeries, test: &PriceSeries) -> (MetricReport, Option<Forecast>) {
    let mut report = MetricReport {
        model: spec.clone(),
        label: spec.label(),
        split: None,
        fitted: None,
        rmse: None,
        rmsep: None,
        mape: None,
        failure: None,
    };
    let outcome = fit(spec, train).map_err(|e| e.to_string()).and_then(|fitted| {
        report.fitted = Some(fitted.spec.clone());
        predict(&fitted, test.len()).map_err(|e| e.to_string())
    });
    let forecast = match outcome {
        Ok(f) => f,
        Err(e) => {
            report.failure = Some(e);
            return (report, None);
        }
    };
    let predicted = forecast.values();
    if predicted.iter().any(|v| !v.is_finite()) {
        report.failure = Some("forecast contains non-finite values".into());
        return (report, Some(forecast));
    }
    match score(&test.values(), &predicted) {
        Ok(s) => {
            report.rmse = Some(s.rmse);
            report.rmsep = Some(s.rmsep);
            report.mape = Some(s.mape);
        }
        Err(e) => report.failure = Some(e.to_string()),
    }
    (report, Some(forecast))
}

/// A leaderboard together with each row's test-window forecast.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub leaderboard: Leaderboard,
    pub forecasts: Vec<Option<Forecast>>,
}

/// Scores every spec on one train/test split. Rows keep the input order;
/// failed fits become flagged rows.
pub fn evaluate_all(
    series: &PriceSeries,
    specs: &[ModelSpec],
    test_fraction: f64,
) -> Result<Leaderboard, EvalError> {
    evaluate_all_detailed(series, specs, test_fraction).map(|e| e.leaderboard)
}

pub fn evaluate_all_detailed(
    series: &PriceSeries,
    specs: &[ModelSpec],
    test_fraction: f64,
) -> Result<Evaluation, EvalError> {
    if specs.is_empty() {
        return Err(EvalError::Parameter("no model specs to evaluate".into()));
    }
    let (train, test) = train_test_split(series, test_fraction)?;
    let (rows, forecasts): (Vec<_>, Vec<_>) = specs
        .par_iter()
        .map(|spec| run_one(spec, &train, &test))
        .collect::<Vec<_>>()
        .into_iter()
        .unzip();
    if rows.iter().all(MetricReport::failed) {
        return Err(EvalError::EmptyLeaderboard(series.crop().to_string()));
    }
    Ok(Evaluation {
        leaderboard: Leaderboard {
            crop: series.crop().to_string(),
            split: SplitInfo {
                train_len: train.len(),
                test_len: test.len(),
                train_end_date: train.last_date(),
                test_end_date: test.last_date(),
            },
            rows,
        },
        forecasts,
    })
}

fn mean(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}

/// Expanding-window cross-validation of every spec over `k` folds.
pub fn rolling_cross_validate(
    series: &PriceSeries,
    specs: &[ModelSpec],
    k: usize,
) -> Result<Vec<CvReport>, EvalError> {
    let folds = rolling_cv_splits(series.len(), k)?;
    let jobs: Vec<(usize, SplitSpec)> = (0..specs.len())
        .flat_map(|i| folds.iter().map(move |f| (i, *f)))
        .collect();
    let mut results: Vec<MetricReport> = jobs
        .par_iter()
        .map(|&(i, fold)| {
            let train = series.slice(fold.train());
            let test = series.slice(fold.test());
            let (mut report, _) = run_one(&specs[i], &train, &test);
            report.split = Some(fold);
            report
        })
        .collect();

    let mut reports = Vec::with_capacity(specs.len());
    for spec in specs.iter().rev() {
        let per_fold = results.split_off(results.len() - folds.len());
        let scored: Vec<Scores> = per_fold.iter().filter_map(MetricReport::scores).collect();
        let pick = |f: fn(&Scores) -> f64| mean(&scored.iter().map(f).collect::<Vec<_>>());
        reports.push(CvReport {
            crop: series.crop().to_string(),
            model: spec.clone(),
            label: spec.label(),
            mean_mape: pick(|s| s.mape),
            mean_rmse: pick(|s| s.rmse),
            mean_rmsep: pick(|s| s.rmsep),
            failed_folds: per_fold.len() - scored.len(),
            per_fold,
        });
    }
    reports.reverse();
    Ok(reports)
}

/// Picks the spec with the lowest mean MAPE; ties go to lower mean RMSE,
/// then fewer parameters, then label order.
pub fn select_champion(reports: &[CvReport]) -> Result<ModelSpec, EvalError> {
    if let Some(first) = reports.first() {
        if let Some(other) = reports.iter().find(|r| r.crop != first.crop) {
            return Err(EvalError::Parameter(format!(
                "reports mix crops `{}` and `{}`",
                first.crop, other.crop
            )));
        }
    }
    reports
        .iter()
        .filter_map(|r| Some((r.mean_mape?, r.mean_rmse?, r)))
        .min_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(a.2.model.parameter_count().cmp(&b.2.model.parameter_count()))
                .then_with(|| a.2.label.cmp(&b.2.label))
        })
        .map(|(_, _, r)| r.model.clone())
        .ok_or(EvalError::NoChampion)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::SarimaxOrder;

    fn series(values: &[f64]) -> PriceSeries {
        PriceSeries::from_values("Jowar", NaiveDate::from_ymd_opt(2012, 1, 2).unwrap(), values).unwrap()
    }

    fn report(spec: ModelSpec, mape: Option<f64>, rmse: Option<f64>) -> CvReport {
        CvReport {
            crop: "Jowar".into(),
            label: spec.label(),
            model: spec,
            per_fold: Vec::new(),
            mean_mape: mape,
            mean_rmse: rmse,
            mean_rmsep: rmse,
            failed_folds: 0,
        }
    }

    #[test]
    fn naive_leaderboard_by_hand() {
        let board = evaluate_all(&series(&[1.0, 2.0, 3.0, 4.0, 5.0]), &[ModelSpec::Naive], 0.4).unwrap();
        assert_eq!(board.rows.len(), 1);
        let row = &board.rows[0];
        assert!((row.rmse.unwrap() - (2.5f64).sqrt()).abs() < 1e-12);
        assert!((row.mape.unwrap() - 32.5).abs() < 1e-9);
        assert_eq!(board.split.train_len, 3);
        assert_eq!(board.split.test_len, 2);
    }

    #[test]
    fn linear_series_is_perfect_for_regression() {
        let values: Vec<f64> = (0..40).map(|t| 5.0 + 0.5 * t as f64).collect();
        let board = evaluate_all(&series(&values), &[ModelSpec::LinearRegression], 0.25).unwrap();
        let s = board.rows[0].scores().unwrap();
        assert!(s.rmse < 1e-9 && s.rmsep < 1e-9 && s.mape < 1e-9);
    }

    #[test]
    fn failed_specs_are_flagged_rows() {
        let specs = [
            ModelSpec::Naive,
            ModelSpec::holt_winters_additive(52),
            ModelSpec::MovingAverage { window: 3 },
        ];
        let board = evaluate_all(&series(&[4.0, 5.0, 6.0, 5.0, 4.0, 5.0, 6.0, 7.0]), &specs, 0.25).unwrap();
        assert_eq!(board.rows.len(), 3);
        assert!(!board.rows[0].failed());
        assert!(board.rows[1].failed());
        assert!(board.rows[1].rmse.is_none());
        assert_eq!(board.rows[2].label, "Moving Average(3)");

        let only_bad = [ModelSpec::holt_winters_additive(52)];
        assert!(matches!(
            evaluate_all(&series(&[4.0, 5.0, 6.0, 5.0]), &only_bad, 0.25),
            Err(EvalError::EmptyLeaderboard(_))
        ));
    }

    #[test]
    fn cv_on_constant_series() {
        let reports = rolling_cross_validate(&series(&[5.0; 20]), &[ModelSpec::Naive], 4).unwrap();
        assert_eq!(reports.len(), 1);
        let r = &reports[0];
        assert_eq!(r.per_fold.len(), 4);
        for fold in &r.per_fold {
            assert_eq!(fold.rmse, Some(0.0));
            assert_eq!(fold.mape, Some(0.0));
        }
        assert_eq!(r.per_fold[2].split.unwrap().fold_index, 3);
    }

    #[test]
    fn cv_means_are_fold_means() {
        let values: Vec<f64> = (0..60).map(|t| 20.0 + ((t * 17) % 9) as f64).collect();
        let specs = [ModelSpec::Naive, ModelSpec::SimpleAverage, ModelSpec::MovingAverage { window: 4 }];
        let reports = rolling_cross_validate(&series(&values), &specs, 4).unwrap();
        for (spec, r) in specs.iter().zip(&reports) {
            assert_eq!(&r.model, spec);
            let mapes: Vec<f64> = r.per_fold.iter().map(|f| f.mape.unwrap()).collect();
            let m = mapes.iter().sum::<f64>() / 4.0;
            assert!((r.mean_mape.unwrap() - m).abs() < 1e-12);
        }
    }

    #[test]
    fn cv_all_folds_failing_is_flagged() {
        let values: Vec<f64> = (0..25).map(|t| 20.0 + t as f64).collect();
        let reports =
            rolling_cross_validate(&series(&values), &[ModelSpec::holt_winters_additive(52)], 4).unwrap();
        assert!(reports[0].failed());
        assert_eq!(reports[0].failed_folds, 4);
        assert!(matches!(select_champion(&reports), Err(EvalError::NoChampion)));
    }

    #[test]
    fn champion_rules() {
        let a = report(ModelSpec::Naive, Some(5.0), Some(3.0));
        let b = report(ModelSpec::SimpleAverage, Some(7.0), Some(1.0));
        assert_eq!(select_champion(&[b.clone(), a.clone()]).unwrap(), ModelSpec::Naive);

        let c = report(ModelSpec::SimpleAverage, Some(5.0), Some(1.0));
        let d = report(ModelSpec::Naive, Some(5.0), Some(2.0));
        assert_eq!(select_champion(&[d.clone(), c.clone()]).unwrap(), ModelSpec::SimpleAverage);

        let sarimax = ModelSpec::Sarimax {
            order: SarimaxOrder::arima(2, 1, 1),
            constant: true,
        };
        let e = report(sarimax, Some(5.0), Some(1.0));
        assert_eq!(select_champion(&[e, c.clone()]).unwrap(), ModelSpec::SimpleAverage);
        assert_eq!(select_champion(&[a.clone()]).unwrap(), ModelSpec::Naive);

        let mut other_crop = a.clone();
        other_crop.crop = "Urad".into();
        assert!(matches!(select_champion(&[a, other_crop]), Err(EvalError::Parameter(_))));
    }
}
