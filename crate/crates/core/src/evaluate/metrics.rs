use serde::{Deserialize, Serialize};

use super::EvalError;

fn check(actual: &[f64], predicted: &[f64]) -> Result<(), EvalError> {
    if actual.len() != predicted.len() {
        return Err(EvalError::LengthMismatch {
            actual: actual.len(),
            predicted: predicted.len(),
        });
    }
    if actual.is_empty() {
        return Err(EvalError::Parameter("metrics need at least one point".into()));
    }
    Ok(())
}

/// Root mean squared error.
pub fn rmse(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    check(actual, predicted)?;
    let mse = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).powi(2))
        .sum::<f64>()
        / actual.len() as f64;
    Ok(mse.sqrt())
}

/// RMSE as a percentage of the mean actual value.
pub fn rmsep(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    let e = rmse(actual, predicted)?;
    let mean = actual.iter().sum::<f64>() / actual.len() as f64;
    if !(mean > 0.0) {
        return Err(EvalError::UndefinedMetric(format!(
            "RMSEP needs a positive mean actual, got {mean}"
        )));
    }
    Ok(100.0 * e / mean)
}

/// Mean absolute percentage error, in percent.
pub fn mape(actual: &[f64], predicted: &[f64]) -> Result<f64, EvalError> {
    check(actual, predicted)?;
    if let Some(i) = actual.iter().position(|a| *a == 0.0) {
        return Err(EvalError::UndefinedMetric(format!(
            "MAPE undefined: actual value at index {i} is zero"
        )));
    }
    let total: f64 = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| ((a - p) / a).abs())
        .sum();
    Ok(100.0 * total / actual.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub rmse: f64,
    pub rmsep: f64,
    pub mape: f64,
}

pub fn score(actual: &[f64], predicted: &[f64]) -> Result<Scores, EvalError> {
    Ok(Scores {
        rmse: rmse(actual, predicted)?,
        rmsep: rmsep(actual, predicted)?,
        mape: mape(actual, predicted)?,
    })
}
