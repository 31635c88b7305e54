//! Splitting, differencing and stationarity diagnostics for price series.

mod adf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::PriceSeries;

pub use adf::{adf_stationarity, default_max_lag, StationarityReport, Verdict, ADF_CRITICAL_VALUES};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SeriesError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("insufficient data: need at least {needed} points, have {have}")]
    InsufficientData { needed: usize, have: usize },
    #[error("degenerate regression: {0}")]
    Degenerate(String),
}

/// One expanding-window fold: train on `[0, train_end)`, test on
/// `[train_end, test_end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub fold_index: usize,
    pub train_end: usize,
    pub test_end: usize,
}

impl SplitSpec {
    pub fn train(&self) -> std::ops::Range<usize> {
        0..self.train_end
    }

    pub fn test(&self) -> std::ops::Range<usize> {
        self.train_end..self.test_end
    }
}

/// Number of trailing points held out for a test fraction. Uses the ceiling;
/// the small epsilon keeps products such as `10 * 0.3` from rounding up.
pub fn test_size(n: usize, test_fraction: f64) -> usize {
    ((n as f64 * test_fraction) - 1e-9).ceil().max(0.0) as usize
}

/// Holds out the last `⌈n·test_fraction⌉` points as the test set.
pub fn train_test_split(
    series: &PriceSeries,
    test_fraction: f64,
) -> Result<(PriceSeries, PriceSeries), SeriesError> {
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(SeriesError::Parameter(format!(
            "test fraction {test_fraction} outside (0, 1)"
        )));
    }
    let n = series.len();
    if n < 4 {
        return Err(SeriesError::InsufficientData { needed: 4, have: n });
    }
    let test = test_size(n, test_fraction).max(1);
    if n - test < 2 {
        return Err(SeriesError::Parameter(format!(
            "test fraction {test_fraction} leaves {} training points",
            n - test
        )));
    }
    Ok((series.slice(0..n - test), series.slice(n - test..n)))
}

/// Expanding-window folds over `n` points.
///
/// The index range is cut into `k + 1` chunks of `n / (k + 1)` points, with
/// the remainder added to the first chunk. Fold `i` trains on chunks `1..=i`
/// and tests on chunk `i + 1`.
pub fn rolling_cv_splits(n: usize, k: usize) -> Result<Vec<SplitSpec>, SeriesError> {
    if k < 2 {
        return Err(SeriesError::Parameter(format!("need at least 2 folds, got {k}")));
    }
    if n < k + 1 {
        return Err(SeriesError::InsufficientData { needed: k + 1, have: n });
    }
    let chunk = n / (k + 1);
    let first = chunk + n % (k + 1);
    Ok((1..=k)
        .map(|i| {
            let train_end = first + (i - 1) * chunk;
            SplitSpec {
                fold_index: i,
                train_end,
                test_end: train_end + chunk,
            }
        })
        .collect())
}

/// `out[t] = values[t + lag] - values[t]`.
pub fn difference(values: &[f64], lag: usize) -> Result<Vec<f64>, SeriesError> {
    if lag == 0 || lag >= values.len() {
        return Err(SeriesError::Parameter(format!(
            "lag {lag} invalid for length {}",
            values.len()
        )));
    }
    Ok(values.windows(lag + 1).map(|w| w[lag] - w[0]).collect())
}

/// Inverse of [`difference`]: rebuilds a series from its first `lag` values
/// and the lagged differences.
pub fn integrate(anchors: &[f64], diffs: &[f64]) -> Vec<f64> {
    let lag = anchors.len();
    let mut out = Vec::with_capacity(lag + diffs.len());
    out.extend_from_slice(anchors);
    for (t, d) in diffs.iter().enumerate() {
        out.push(out[t] + d);
    }
    debug_assert!(lag > 0 || diffs.is_empty());
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;
    use proptest::prelude::*;

    fn series(n: usize) -> PriceSeries {
        let values: Vec<f64> = (0..n).map(|i| 10.0 + i as f64).collect();
        PriceSeries::from_values("Maize", NaiveDate::from_ymd_opt(2012, 1, 2).unwrap(), &values)
            .unwrap()
    }

    #[test]
    fn split_sizes_use_ceiling() {
        let (train, test) = train_test_split(&series(10), 0.2).unwrap();
        assert_eq!((train.len(), test.len()), (8, 2));
        let (train, test) = train_test_split(&series(5), 0.5).unwrap();
        assert_eq!((train.len(), test.len()), (2, 3));
        assert_eq!(test_size(10, 0.3), 3);
    }

    #[test]
    fn split_rejects_bad_fraction() {
        for f in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(matches!(train_test_split(&series(10), f), Err(SeriesError::Parameter(_))));
        }
        assert!(train_test_split(&series(3), 0.2).is_err());
        assert!(train_test_split(&series(5), 0.9).is_err());
    }

    #[test]
    fn cv_splits_hundred_by_four() {
        let folds = rolling_cv_splits(100, 4).unwrap();
        let bounds: Vec<_> = folds.iter().map(|f| (f.train_end, f.test_end)).collect();
        assert_eq!(bounds, [(20, 40), (40, 60), (60, 80), (80, 100)]);
        assert_eq!(folds[0].fold_index, 1);
    }

    #[test]
    fn cv_splits_unit_chunks_and_remainder() {
        let bounds: Vec<_> = rolling_cv_splits(5, 4)
            .unwrap()
            .iter()
            .map(|f| (f.train_end, f.test_end))
            .collect();
        assert_eq!(bounds, [(1, 2), (2, 3), (3, 4), (4, 5)]);
        // 103 = 5 * 20 + 3: first chunk absorbs the 3 extra points
        let folds = rolling_cv_splits(103, 4).unwrap();
        assert_eq!(folds[0].train_end, 23);
        assert_eq!(folds[3].test_end, 103);
    }

    #[test]
    fn cv_split_errors() {
        assert!(matches!(rolling_cv_splits(4, 4), Err(SeriesError::InsufficientData { .. })));
        assert!(matches!(rolling_cv_splits(100, 1), Err(SeriesError::Parameter(_))));
    }

    #[test]
    fn difference_examples() {
        assert_eq!(difference(&[1.0, 2.0, 4.0, 7.0], 1).unwrap(), [1.0, 2.0, 3.0]);
        assert_eq!(difference(&[1.0, 2.0, 3.0, 4.0], 2).unwrap(), [2.0, 2.0]);
        assert_eq!(difference(&[5.0; 6], 1).unwrap(), [0.0; 5]);
        assert!(difference(&[1.0, 2.0], 2).is_err());
        assert!(difference(&[1.0, 2.0], 0).is_err());
    }

    proptest! {
        #[test]
        fn split_partitions_input(values in prop::collection::vec(1.0f64..100.0, 4..80), frac in 0.05f64..0.5) {
            let s = PriceSeries::from_values("x", NaiveDate::from_ymd_opt(2012, 1, 2).unwrap(), &values).unwrap();
            if let Ok((train, test)) = train_test_split(&s, frac) {
                let mut joined = train.points().to_vec();
                joined.extend_from_slice(test.points());
                prop_assert_eq!(joined.as_slice(), s.points());
                prop_assert_eq!(test.len(), test_size(values.len(), frac).max(1));
            }
        }

        #[test]
        fn cv_test_windows_tile_tail(n in 3usize..400, k in 2usize..8) {
            prop_assume!(n >= k + 1);
            let folds = rolling_cv_splits(n, k).unwrap();
            prop_assert_eq!(folds.len(), k);
            let first = folds[0].train_end;
            prop_assert_eq!(first, n / (k + 1) + n % (k + 1));
            let mut covered = vec![0u32; n];
            for (i, f) in folds.iter().enumerate() {
                prop_assert!(0 < f.train_end && f.train_end < f.test_end && f.test_end <= n);
                if i > 0 {
                    prop_assert!(f.train_end > folds[i - 1].train_end);
                    prop_assert_eq!(f.train_end, folds[i - 1].test_end);
                }
                for t in f.test() {
                    covered[t] += 1;
                }
            }
            prop_assert!(covered[..first].iter().all(|&c| c == 0));
            prop_assert!(covered[first..].iter().all(|&c| c == 1));
        }

        #[test]
        fn difference_then_integrate(values in prop::collection::vec(-1e3f64..1e3, 2..100), lag in 1usize..6) {
            prop_assume!(lag < values.len());
            let diffs = difference(&values, lag).unwrap();
            prop_assert_eq!(diffs.len(), values.len() - lag);
            let rebuilt = integrate(&values[..lag], &diffs);
            for (a, b) in rebuilt.iter().zip(&values) {
                prop_assert!((a - b).abs() <= 1e-9);
            }
        }
    }
}
