use serde::{Deserialize, Serialize};

use super::SeriesError;
use crate::ols::{ols, OlsFit};

/// Large-sample Dickey-Fuller critical values for the constant-only
/// regression, as (level, value).
pub const ADF_CRITICAL_VALUES: [(&str, f64); 3] = [("1%", -3.43), ("5%", -2.86), ("10%", -2.57)];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Stationary,
    NonStationary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub test_statistic: f64,
    pub critical_values: std::collections::BTreeMap<String, f64>,
    pub lags_used: usize,
    pub nobs: usize,
    /// Decision at the 5% level.
    pub verdict: Verdict,
}

/// Lagged-difference design for `Δy_t = c + γ y_{t-1} + Σ δ_i Δy_{t-i}`,
/// over observations `t` in `first..n`.
fn design(y: &[f64], lags: usize, first: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let mut rows = Vec::with_capacity(y.len() - first);
    let mut target = Vec::with_capacity(y.len() - first);
    for t in first..y.len() {
        let mut row = Vec::with_capacity(lags + 2);
        row.push(1.0);
        row.push(y[t - 1]);
        for i in 1..=lags {
            row.push(y[t - i] - y[t - i - 1]);
        }
        rows.push(row);
        target.push(y[t] - y[t - 1]);
    }
    (rows, target)
}

fn aic(fit: &OlsFit) -> f64 {
    let n = fit.nobs as f64;
    n * (fit.sse / n).ln() + 2.0 * fit.coefficients.len() as f64
}

/// Augmented Dickey-Fuller test with a constant and no trend.
///
/// The lag order is chosen in `0..=max_lag` by AIC on a common sample, then
/// the chosen regression is refit on all usable observations.
pub fn adf_stationarity(y: &[f64], max_lag: usize) -> Result<StationarityReport, SeriesError> {
    let needed = 20 + max_lag;
    if y.len() < needed {
        return Err(SeriesError::InsufficientData {
            needed,
            have: y.len(),
        });
    }

    let mut best: Option<(usize, f64)> = None;
    for lags in 0..=max_lag {
        let (rows, target) = design(y, lags, max_lag + 1);
        let Some(fit) = ols(&rows, &target) else {
            continue;
        };
        let score = aic(&fit);
        if best.is_none_or(|(_, s)| score < s) {
            best = Some((lags, score));
        }
    }
    let (lags, _) = best.ok_or_else(|| {
        SeriesError::Degenerate("no lag order gives a full-rank regression".into())
    })?;

    let (rows, target) = design(y, lags, lags + 1);
    let fit = ols(&rows, &target)
        .ok_or_else(|| SeriesError::Degenerate(format!("singular design at {lags} lags")))?;
    let gamma = fit.coefficients[1];
    let scale: f64 = target.iter().map(|d| d * d).sum();

    let test_statistic = if fit.sse <= 1e-20 * scale.max(f64::MIN_POSITIVE) {
        // Exact fit: a zero level coefficient means a deterministic drift,
        // which cannot reject the unit root.
        if gamma.abs() <= 1e-10 {
            0.0
        } else {
            return Err(SeriesError::Degenerate(
                "regression fits exactly; t-statistic undefined".into(),
            ));
        }
    } else {
        gamma / fit.std_errors[1]
    };

    let critical_values = ADF_CRITICAL_VALUES
        .iter()
        .map(|(k, v)| (k.to_string(), *v))
        .collect();
    let verdict = if test_statistic < ADF_CRITICAL_VALUES[1].1 {
        Verdict::Stationary
    } else {
        Verdict::NonStationary
    };
    Ok(StationarityReport {
        test_statistic,
        critical_values,
        lags_used: lags,
        nobs: fit.nobs,
        verdict,
    })
}

/// Default maximum lag, `⌊12 (n/100)^¼⌋`.
pub fn default_max_lag(n: usize) -> usize {
    (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize
}
