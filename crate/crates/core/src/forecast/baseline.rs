use super::{FittedModel, ForecastError, ModelSpec, ModelState};
use crate::ingest::PriceSeries;

/// Fits the linear-regression, naive, simple-average and moving-average
/// baselines.
pub fn fit_baseline(spec: &ModelSpec, train: &PriceSeries) -> Result<FittedModel, ForecastError> {
    let y = train.values();
    let n = y.len();
    if n < 2 {
        return Err(ForecastError::InsufficientData { needed: 2, have: n });
    }
    let (state, sse) = match spec {
        ModelSpec::LinearRegression => {
            let t_mean = (n - 1) as f64 / 2.0;
            let y_mean = y.iter().sum::<f64>() / n as f64;
            let (sxy, sxx) = y.iter().enumerate().fold((0.0, 0.0), |(sxy, sxx), (t, v)| {
                let dt = t as f64 - t_mean;
                (sxy + dt * (v - y_mean), sxx + dt * dt)
            });
            let slope = sxy / sxx;
            let intercept = y_mean - slope * t_mean;
            let sse = y
                .iter()
                .enumerate()
                .map(|(t, v)| (v - intercept - slope * t as f64).powi(2))
                .sum();
            (ModelState::Line { intercept, slope }, sse)
        }
        ModelSpec::Naive => {
            let sse = y.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum();
            (ModelState::Flat { level: y[n - 1] }, sse)
        }
        ModelSpec::SimpleAverage => {
            let mean = y.iter().sum::<f64>() / n as f64;
            let sse = y.iter().map(|v| (v - mean).powi(2)).sum();
            (ModelState::Flat { level: mean }, sse)
        }
        &ModelSpec::MovingAverage { window } => {
            if window == 0 || window > n {
                return Err(ForecastError::Parameter(format!(
                    "moving average window {window} invalid for {n} training points"
                )));
            }
            let mean_of = |s: &[f64]| s.iter().sum::<f64>() / window as f64;
            let sse = (window..n)
                .map(|t| (y[t] - mean_of(&y[t - window..t])).powi(2))
                .sum();
            (ModelState::Flat { level: mean_of(&y[n - window..]) }, sse)
        }
        other => {
            return Err(ForecastError::Parameter(format!(
                "{} is not a baseline model",
                other.family()
            )))
        }
    };
    Ok(FittedModel::new(spec.clone(), state, train, Some(sse)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecast::predict;
    use chrono::NaiveDate;

    fn series(values: &[f64]) -> PriceSeries {
        PriceSeries::from_values("Urad", NaiveDate::from_ymd_opt(2014, 6, 2).unwrap(), values).unwrap()
    }

    fn forecast(spec: ModelSpec, values: &[f64], h: usize) -> Vec<f64> {
        predict(&fit_baseline(&spec, &series(values)).unwrap(), h).unwrap().values()
    }

    #[test]
    fn naive_repeats_last() {
        assert_eq!(forecast(ModelSpec::Naive, &[1.0, 2.0, 3.0], 2), [3.0, 3.0]);
    }

    #[test]
    fn simple_average_is_mean() {
        assert_eq!(forecast(ModelSpec::SimpleAverage, &[2.0, 4.0, 6.0], 3), [4.0; 3]);
    }

    #[test]
    fn moving_average_uses_last_window() {
        let f = forecast(ModelSpec::MovingAverage { window: 3 }, &[2.0, 4.0, 6.0, 8.0], 2);
        assert_eq!(f, [6.0, 6.0]);
        let err = fit_baseline(&ModelSpec::MovingAverage { window: 5 }, &series(&[1.0, 2.0, 3.0]));
        assert!(matches!(err, Err(ForecastError::Parameter(_))));
    }

    #[test]
    fn linear_regression_extends_line() {
        let f = forecast(ModelSpec::LinearRegression, &[1.0, 2.0, 3.0, 4.0], 3);
        for (got, want) in f.iter().zip([5.0, 6.0, 7.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn needs_two_points() {
        assert!(matches!(
            fit_baseline(&ModelSpec::Naive, &series(&[1.0])),
            Err(ForecastError::InsufficientData { .. })
        ));
    }
}
