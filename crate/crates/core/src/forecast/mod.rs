//! Forecasting models behind a common fit/predict interface.
//!
//! A [`ModelSpec`] names a model family and any fixed parameters. Fitting
//! produces a [`FittedModel`] that owns everything needed to forecast, so
//! [`predict`] is a pure function of the fitted model and the horizon.
//! Fitted models serialize to JSON and can be cached.

mod baseline;
mod optim;
mod sarimax;
mod select;
mod smoothing;

use chrono::{Duration, NaiveDate};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{PricePoint, PriceSeries};

pub use optim::{nelder_mead, NelderMeadOptions, NelderMeadResult};
pub use sarimax::fit_sarimax;
pub use select::{information_criteria, select_order, Criterion, OrderGrid, SelectedOrder};
pub use smoothing::SMOOTHING_GRID_STEPS;

/// Version of the [`FittedModel`] JSON layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Seasonal period assumed for weekly prices.
pub const WEEKLY_SEASONAL_PERIOD: usize = 52;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForecastError {
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("insufficient data: need at least {needed} points, have {have}")]
    InsufficientData { needed: usize, have: usize },
    #[error("multiplicative model needs strictly positive data (value {value} at index {index})")]
    Positivity { index: usize, value: f64 },
    #[error("optimizer did not converge for {model} within {iterations} iterations")]
    Convergence { model: String, iterations: usize },
    #[error("no candidate order could be fitted")]
    NoViableOrder,
}

/// Orders of a seasonal ARIMA model, `(p,d,q)(P,D,Q)s`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SarimaxOrder {
    pub p: usize,
    pub d: usize,
    pub q: usize,
    #[serde(rename = "P")]
    pub seasonal_p: usize,
    #[serde(rename = "D")]
    pub seasonal_d: usize,
    #[serde(rename = "Q")]
    pub seasonal_q: usize,
    /// Seasonal period; 0 means no seasonal part.
    pub s: usize,
}

impl SarimaxOrder {
    pub const fn arima(p: usize, d: usize, q: usize) -> Self {
        Self {
            p,
            d,
            q,
            seasonal_p: 0,
            seasonal_d: 0,
            seasonal_q: 0,
            s: 0,
        }
    }

    pub const fn seasonal(
        (p, d, q): (usize, usize, usize),
        (seasonal_p, seasonal_d, seasonal_q): (usize, usize, usize),
        s: usize,
    ) -> Self {
        Self {
            p,
            d,
            q,
            seasonal_p,
            seasonal_d,
            seasonal_q,
            s,
        }
    }

    pub fn has_seasonal_terms(&self) -> bool {
        self.seasonal_p + self.seasonal_d + self.seasonal_q > 0
    }

    pub fn validate(&self) -> Result<(), ForecastError> {
        if self.s == 1 {
            return Err(ForecastError::Parameter("seasonal period 1 is not seasonal".into()));
        }
        if self.s == 0 && self.has_seasonal_terms() {
            return Err(ForecastError::Parameter(format!(
                "{self} has seasonal orders but no seasonal period"
            )));
        }
        Ok(())
    }

    /// ARMA coefficients estimated (excluding constant and regressors).
    pub fn coefficient_count(&self) -> usize {
        self.p + self.q + self.seasonal_p + self.seasonal_q
    }

    /// Minimum training length accepted by [`fit_sarimax`].
    pub fn min_train_len(&self) -> usize {
        let s = self.s;
        let span = self.p.max(self.q).max(s * self.seasonal_p).max(s * self.seasonal_q);
        self.d + s * self.seasonal_d + span + 2
    }
}

impl std::fmt::Display for SarimaxOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{},{})", self.p, self.d, self.q)?;
        if self.s > 0 {
            write!(
                f,
                "({},{},{},{})",
                self.seasonal_p, self.seasonal_d, self.seasonal_q, self.s
            )?;
        }
        Ok(())
    }
}

/// Explicit starting state for a smoothing model, replacing the default
/// heuristic initialization. `seasonals` is indexed by phase `t mod m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub level: f64,
    #[serde(default)]
    pub trend: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub seasonals: Vec<f64>,
}

/// Which model to fit. Smoothing parameters left as `None` are optimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    LinearRegression,
    Naive,
    SimpleAverage,
    MovingAverage {
        window: usize,
    },
    Ses {
        alpha: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        init: Option<InitialState>,
    },
    Holt {
        alpha: Option<f64>,
        beta: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        init: Option<InitialState>,
    },
    HoltWintersAdditive {
        alpha: Option<f64>,
        beta: Option<f64>,
        gamma: Option<f64>,
        seasonal_period: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        init: Option<InitialState>,
    },
    HoltWintersMultiplicative {
        alpha: Option<f64>,
        beta: Option<f64>,
        gamma: Option<f64>,
        seasonal_period: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        init: Option<InitialState>,
    },
    Arima {
        order: SarimaxOrder,
        #[serde(default)]
        constant: bool,
    },
    Sarimax {
        order: SarimaxOrder,
        #[serde(default)]
        constant: bool,
    },
}

impl ModelSpec {
    pub fn ses() -> Self {
        ModelSpec::Ses {
            alpha: None,
            init: None,
        }
    }

    pub fn holt() -> Self {
        ModelSpec::Holt {
            alpha: None,
            beta: None,
            init: None,
        }
    }

    pub fn holt_winters_additive(seasonal_period: usize) -> Self {
        ModelSpec::HoltWintersAdditive {
            alpha: None,
            beta: None,
            gamma: None,
            seasonal_period,
            init: None,
        }
    }

    pub fn holt_winters_multiplicative(seasonal_period: usize) -> Self {
        ModelSpec::HoltWintersMultiplicative {
            alpha: None,
            beta: None,
            gamma: None,
            seasonal_period,
            init: None,
        }
    }

    /// Snake-case family name, also used for file names.
    pub fn family(&self) -> &'static str {
        match self {
            ModelSpec::LinearRegression => "linear_regression",
            ModelSpec::Naive => "naive",
            ModelSpec::SimpleAverage => "simple_average",
            ModelSpec::MovingAverage { .. } => "moving_average",
            ModelSpec::Ses { .. } => "ses",
            ModelSpec::Holt { .. } => "holt",
            ModelSpec::HoltWintersAdditive { .. } => "holt_winters_additive",
            ModelSpec::HoltWintersMultiplicative { .. } => "holt_winters_multiplicative",
            ModelSpec::Arima { .. } => "arima",
            ModelSpec::Sarimax { .. } => "sarimax",
        }
    }

    /// Row label for leaderboards.
    pub fn label(&self) -> String {
        match self {
            ModelSpec::LinearRegression => "Linear Regression".into(),
            ModelSpec::Naive => "Naive".into(),
            ModelSpec::SimpleAverage => "Simple Average".into(),
            ModelSpec::MovingAverage { window } => format!("Moving Average({window})"),
            ModelSpec::Ses { .. } => "Simple Exponential Smoothing".into(),
            ModelSpec::Holt { .. } => "Holt Linear".into(),
            ModelSpec::HoltWintersAdditive { .. } => "Holt-Winters Additive".into(),
            ModelSpec::HoltWintersMultiplicative { .. } => "Holt-Winters Multiplicative".into(),
            ModelSpec::Arima { order, .. } => format!("ARIMA{order}"),
            ModelSpec::Sarimax { order, .. } => format!("SARIMAX{order}"),
        }
    }

    /// Number of estimated parameters, used for tie-breaking.
    pub fn parameter_count(&self) -> usize {
        match self {
            ModelSpec::Naive => 0,
            ModelSpec::SimpleAverage | ModelSpec::MovingAverage { .. } | ModelSpec::Ses { .. } => 1,
            ModelSpec::LinearRegression | ModelSpec::Holt { .. } => 2,
            ModelSpec::HoltWintersAdditive { .. } | ModelSpec::HoltWintersMultiplicative { .. } => 3,
            ModelSpec::Arima { order, constant } | ModelSpec::Sarimax { order, constant } => {
                order.coefficient_count() + usize::from(*constant)
            }
        }
    }

    pub fn validate(&self) -> Result<(), ForecastError> {
        let unit = |name: &str, v: &Option<f64>| match v {
            Some(x) if !(0.0..=1.0).contains(x) => Err(ForecastError::Parameter(format!(
                "{name} = {x} outside [0, 1]"
            ))),
            _ => Ok(()),
        };
        match self {
            ModelSpec::MovingAverage { window } if *window == 0 => {
                Err(ForecastError::Parameter("moving average window must be ≥ 1".into()))
            }
            ModelSpec::Ses { alpha, .. } => unit("alpha", alpha),
            ModelSpec::Holt { alpha, beta, .. } => {
                unit("alpha", alpha)?;
                unit("beta", beta)
            }
            ModelSpec::HoltWintersAdditive {
                alpha,
                beta,
                gamma,
                seasonal_period,
                ..
            }
            | ModelSpec::HoltWintersMultiplicative {
                alpha,
                beta,
                gamma,
                seasonal_period,
                ..
            } => {
                unit("alpha", alpha)?;
                unit("beta", beta)?;
                unit("gamma", gamma)?;
                if *seasonal_period < 2 {
                    return Err(ForecastError::Parameter(format!(
                        "seasonal period {seasonal_period} must be ≥ 2"
                    )));
                }
                Ok(())
            }
            ModelSpec::Arima { order, .. } => {
                order.validate()?;
                if order.s != 0 {
                    return Err(ForecastError::Parameter(format!(
                        "ARIMA order {order} has a seasonal part; use SARIMAX"
                    )));
                }
                Ok(())
            }
            ModelSpec::Sarimax { order, .. } => order.validate(),
            _ => Ok(()),
        }
    }
}

/// The ten model families evaluated per crop.
pub fn model_catalog(
    seasonal_period: usize,
    moving_average_window: usize,
    arima: (SarimaxOrder, bool),
    sarimax: (SarimaxOrder, bool),
) -> Vec<ModelSpec> {
    vec![
        ModelSpec::LinearRegression,
        ModelSpec::Naive,
        ModelSpec::SimpleAverage,
        ModelSpec::MovingAverage {
            window: moving_average_window,
        },
        ModelSpec::ses(),
        ModelSpec::holt(),
        ModelSpec::holt_winters_additive(seasonal_period),
        ModelSpec::holt_winters_multiplicative(seasonal_period),
        ModelSpec::Arima {
            order: arima.0,
            constant: arima.1,
        },
        ModelSpec::Sarimax {
            order: sarimax.0,
            constant: sarimax.1,
        },
    ]
}

/// Per-family state at the end of the training window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelState {
    /// Forecast `intercept + slope * (train_len - 1 + h)`.
    Line { intercept: f64, slope: f64 },
    /// Same value at every horizon.
    Flat { level: f64 },
    /// Exponential smoothing state; `seasonals[i]` applies to step `h` with
    /// `(h - 1) mod m == i`.
    Smoothing {
        level: f64,
        trend: f64,
        seasonals: Vec<f64>,
        multiplicative: bool,
    },
    Sarimax(sarimax::SarimaxState),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWarning {
    NonStationaryAr,
    NonInvertibleMa,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainMeta {
    pub crop: String,
    pub last_date: NaiveDate,
    pub train_len: usize,
    pub log_likelihood: Option<f64>,
    /// In-sample one-step squared error.
    pub sse: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub schema_version: u32,
    /// The requested spec with optimized parameters filled in.
    pub spec: ModelSpec,
    pub state: ModelState,
    pub train_meta: TrainMeta,
    pub aic: Option<f64>,
    pub bic: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<FitWarning>,
}

impl FittedModel {
    pub(crate) fn new(spec: ModelSpec, state: ModelState, train: &PriceSeries, sse: Option<f64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            spec,
            state,
            train_meta: TrainMeta {
                crop: train.crop().to_string(),
                last_date: train.last_date(),
                train_len: train.len(),
                log_likelihood: None,
                sse,
            },
            aic: None,
            bic: None,
            warnings: Vec::new(),
        }
    }

    /// Number of exogenous regressors the model expects at predict time.
    pub fn exog_count(&self) -> usize {
        match &self.state {
            ModelState::Sarimax(s) => s.exog_coefficients.len(),
            _ => 0,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fitted model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ForecastError> {
        let model: FittedModel = serde_json::from_str(text)
            .map_err(|e| ForecastError::Parameter(format!("fitted model JSON: {e}")))?;
        if model.schema_version != SCHEMA_VERSION {
            return Err(ForecastError::Parameter(format!(
                "unsupported schema_version {}",
                model.schema_version
            )));
        }
        Ok(model)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forecast {
    pub crop: String,
    pub horizon: usize,
    pub points: Vec<PricePoint>,
}

impl Forecast {
    pub fn values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.price).collect()
    }

    pub fn mean(&self) -> f64 {
        self.points.iter().map(|p| p.price).sum::<f64>() / self.points.len() as f64
    }
}

/// Fits any model family on a training series.
pub fn fit(spec: &ModelSpec, train: &PriceSeries) -> Result<FittedModel, ForecastError> {
    spec.validate()?;
    match spec {
        ModelSpec::LinearRegression
        | ModelSpec::Naive
        | ModelSpec::SimpleAverage
        | ModelSpec::MovingAverage { .. } => baseline::fit_baseline(spec, train),
        ModelSpec::Ses { .. }
        | ModelSpec::Holt { .. }
        | ModelSpec::HoltWintersAdditive { .. }
        | ModelSpec::HoltWintersMultiplicative { .. } => smoothing::fit_smoothing(spec, train),
        ModelSpec::Arima { order, constant } | ModelSpec::Sarimax { order, constant } => {
            let mut fitted = fit_sarimax(*order, *constant, train, None)?;
            fitted.spec = spec.clone();
            Ok(fitted)
        }
    }
}

pub use baseline::fit_baseline;
pub use smoothing::fit_smoothing;

/// Forecasts `horizon` weeks past the end of training.
pub fn predict(model: &FittedModel, horizon: usize) -> Result<Forecast, ForecastError> {
    predict_with_exog(model, horizon, None)
}

/// As [`predict`], supplying future regressor rows for SARIMAX models fitted
/// with exogenous inputs.
pub fn predict_with_exog(
    model: &FittedModel,
    horizon: usize,
    future_exog: Option<&[Vec<f64>]>,
) -> Result<Forecast, ForecastError> {
    if horizon == 0 {
        return Err(ForecastError::Parameter("horizon must be ≥ 1".into()));
    }
    let n = model.train_meta.train_len;
    let values: Vec<f64> = match &model.state {
        ModelState::Line { intercept, slope } => (1..=horizon)
            .map(|h| intercept + slope * (n - 1 + h) as f64)
            .collect(),
        ModelState::Flat { level } => vec![*level; horizon],
        ModelState::Smoothing {
            level,
            trend,
            seasonals,
            multiplicative,
        } => (1..=horizon)
            .map(|h| smoothing::forecast_step(*level, *trend, seasonals, *multiplicative, h))
            .collect(),
        ModelState::Sarimax(state) => sarimax::forecast(state, horizon, future_exog)?,
    };
    let last = model.train_meta.last_date;
    Ok(Forecast {
        crop: model.train_meta.crop.clone(),
        horizon,
        points: values
            .into_iter()
            .enumerate()
            .map(|(i, price)| PricePoint {
                week_date: last + Duration::days(7 * (i as i64 + 1)),
                price,
            })
            .collect(),
    })
}
