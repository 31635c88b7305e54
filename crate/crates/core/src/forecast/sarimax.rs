//! Seasonal ARIMA with optional exogenous regressors, estimated by
//! conditional sum of squares.
//!
//! The differenced series `w` follows
//!
//! ```text
//! φ(B) Φ(B^s) w_t = c + x_t'β + θ(B) Θ(B^s) e_t
//! ```
//!
//! with pre-sample residuals set to zero. CSS estimates are biased relative
//! to exact maximum likelihood in short samples, most visibly for MA terms.

use serde::{Deserialize, Serialize};

use super::optim::{nelder_mead, NelderMeadOptions};
use super::select::information_criteria;
use super::{FitWarning, FittedModel, ForecastError, ModelSpec, ModelState, SarimaxOrder};
use crate::ingest::PriceSeries;
use crate::ols::ols;
use crate::series::difference;

const COEFFICIENT_STEP: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SarimaxState {
    pub order: SarimaxOrder,
    pub constant: Option<f64>,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub seasonal_ar: Vec<f64>,
    pub seasonal_ma: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exog_coefficients: Vec<f64>,
    pub sigma2: f64,
    /// Training values on the original scale.
    pub history: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub exog_history: Vec<Vec<f64>>,
    /// Residuals on the differenced scale, zero before the conditioning point.
    pub residuals: Vec<f64>,
}

fn lags(order: &SarimaxOrder) -> Vec<usize> {
    let mut out = vec![1; order.d];
    out.extend(std::iter::repeat_n(order.s, order.seasonal_d));
    out
}

/// Original series followed by each successive difference.
fn difference_stack(y: &[f64], lags: &[usize]) -> Vec<Vec<f64>> {
    let mut stack = vec![y.to_vec()];
    for &lag in lags {
        let next = difference(stack.last().expect("nonempty"), lag).expect("length checked by caller");
        stack.push(next);
    }
    stack
}

fn difference_columns(rows: &[Vec<f64>], lags: &[usize]) -> Vec<Vec<f64>> {
    let width = rows.first().map_or(0, Vec::len);
    let columns: Vec<Vec<f64>> = (0..width)
        .map(|j| {
            let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            difference_stack(&col, lags).pop().expect("nonempty")
        })
        .collect();
    let len = columns.first().map_or(0, Vec::len);
    (0..len).map(|t| columns.iter().map(|c| c[t]).collect()).collect()
}

/// Dense lag polynomial of `(1 ± Σ a_i B^i)(1 ± Σ A_j B^{js})` without the
/// leading 1, expressed as right-hand-side coefficients.
///
/// For AR (`sign = -1`) the result `r` gives `w_t = Σ r_k w_{t-k} + ...`;
/// for MA (`sign = +1`) it gives `Σ r_k e_{t-k}`.
fn expand(nonseasonal: &[f64], seasonal: &[f64], s: usize, sign: f64) -> Vec<(usize, f64)> {
    let len = nonseasonal.len() + s * seasonal.len() + 1;
    // full polynomial coefficients, index = lag
    let mut a = vec![0.0; nonseasonal.len() + 1];
    a[0] = 1.0;
    for (i, c) in nonseasonal.iter().enumerate() {
        a[i + 1] = sign * c;
    }
    let mut b = vec![0.0; s * seasonal.len() + 1];
    b[0] = 1.0;
    for (j, c) in seasonal.iter().enumerate() {
        b[(j + 1) * s] = sign * c;
    }
    let mut prod = vec![0.0; len];
    for (i, ai) in a.iter().enumerate() {
        if *ai == 0.0 {
            continue;
        }
        for (j, bj) in b.iter().enumerate() {
            if *bj != 0.0 {
                prod[i + j] += ai * bj;
            }
        }
    }
    prod.iter()
        .enumerate()
        .skip(1)
        .filter(|(_, v)| **v != 0.0)
        .map(|(k, v)| (k, sign * v))
        .collect()
}

struct Layout {
    constant: bool,
    exog: usize,
    order: SarimaxOrder,
    /// First residual index on the differenced scale.
    start: usize,
}

struct Params<'a> {
    constant: f64,
    beta: &'a [f64],
    ar: &'a [f64],
    ma: &'a [f64],
    sar: &'a [f64],
    sma: &'a [f64],
}

impl Layout {
    fn dims(&self) -> usize {
        usize::from(self.constant) + self.exog + self.order.coefficient_count()
    }

    fn split<'a>(&self, x: &'a [f64]) -> Params<'a> {
        let mut rest = x;
        let mut take = |n: usize| {
            let (head, tail) = rest.split_at(n);
            rest = tail;
            head
        };
        let constant = take(usize::from(self.constant)).first().copied().unwrap_or(0.0);
        Params {
            constant,
            beta: take(self.exog),
            ar: take(self.order.p),
            ma: take(self.order.q),
            sar: take(self.order.seasonal_p),
            sma: take(self.order.seasonal_q),
        }
    }

    fn conditioning(&self) -> usize {
        self.start
    }
}

/// Conditional residuals on the differenced scale.
fn residuals(w: &[f64], xw: &[Vec<f64>], layout: &Layout, params: &Params) -> Vec<f64> {
    let s = layout.order.s;
    let ar = expand(params.ar, params.sar, s, -1.0);
    let ma = expand(params.ma, params.sma, s, 1.0);
    let start = layout.conditioning();
    let mut e = vec![0.0; w.len()];
    for t in start..w.len() {
        let mut pred = params.constant;
        if let Some(row) = xw.get(t) {
            pred += row.iter().zip(params.beta).map(|(x, b)| x * b).sum::<f64>();
        }
        for &(k, c) in &ar {
            if k <= t {
                pred += c * w[t - k];
            }
        }
        for &(k, c) in &ma {
            if k <= t {
                pred += c * e[t - k];
            }
        }
        e[t] = w[t] - pred;
    }
    e
}

/// Whether `1 - Σ c_i z^i` has all roots outside the unit circle
/// (step-down recursion on reflection coefficients).
fn is_stable(coefficients: &[f64]) -> bool {
    let mut c = coefficients.to_vec();
    while let Some(&k) = c.last() {
        if !(k.abs() < 1.0) {
            return false;
        }
        let p = c.len();
        let denom = 1.0 - k * k;
        let next: Vec<f64> = (0..p - 1).map(|i| (c[i] + k * c[p - 2 - i]) / denom).collect();
        c = next;
    }
    true
}

fn std_dev(v: &[f64]) -> f64 {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
}

/// Fits a seasonal ARIMA model by conditional least squares with
/// Nelder-Mead, starting from zero ARMA coefficients.
///
/// `exog`, when given, must have one row per training point.
pub fn fit_sarimax(
    order: SarimaxOrder,
    constant: bool,
    train: &PriceSeries,
    exog: Option<&[Vec<f64>]>,
) -> Result<FittedModel, ForecastError> {
    fit_conditioned(order, constant, train, exog, 0)
}

/// As [`fit_sarimax`], but residuals before original-scale index
/// `first_residual` are left out of the sum of squares, so candidates with
/// different lag spans are scored on the same observations.
pub(super) fn fit_conditioned(
    order: SarimaxOrder,
    constant: bool,
    train: &PriceSeries,
    exog: Option<&[Vec<f64>]>,
    first_residual: usize,
) -> Result<FittedModel, ForecastError> {
    order.validate()?;
    let y = train.values();
    let needed = order.min_train_len();
    if y.len() < needed {
        return Err(ForecastError::InsufficientData {
            needed,
            have: y.len(),
        });
    }
    let exog_rows = exog.unwrap_or(&[]);
    let width = exog_rows.first().map_or(0, Vec::len);
    if exog.is_some() {
        if exog_rows.len() != y.len() {
            return Err(ForecastError::Parameter(format!(
                "exog has {} rows for {} observations",
                exog_rows.len(),
                y.len()
            )));
        }
        if width == 0 || exog_rows.iter().any(|r| r.len() != width) {
            return Err(ForecastError::Parameter("exog rows must share a nonzero width".into()));
        }
    }

    let lag_list = lags(&order);
    let w = difference_stack(&y, &lag_list).pop().expect("nonempty");
    let xw = difference_columns(exog_rows, &lag_list);
    let integration = order.d + order.s * order.seasonal_d;
    let layout = Layout {
        constant,
        exog: width,
        order,
        start: (order.p + order.s * order.seasonal_p).max(first_residual.saturating_sub(integration)),
    };
    if layout.start >= w.len() {
        return Err(ForecastError::InsufficientData {
            needed: layout.start + integration + 1,
            have: y.len(),
        });
    }

    // Deterministic start: regression part from OLS, ARMA coefficients zero.
    let sd = std_dev(&w);
    let mut start = Vec::with_capacity(layout.dims());
    let mut steps = Vec::with_capacity(layout.dims());
    if constant || width > 0 {
        let rows: Vec<Vec<f64>> = (0..w.len())
            .map(|t| {
                let mut r = Vec::with_capacity(width + 1);
                if constant {
                    r.push(1.0);
                }
                if let Some(x) = xw.get(t) {
                    r.extend_from_slice(x);
                }
                r
            })
            .collect();
        let regression = if width == 0 {
            vec![w.iter().sum::<f64>() / w.len() as f64]
        } else {
            ols(&rows, &w)
                .map(|f| f.coefficients)
                .unwrap_or_else(|| vec![0.0; rows[0].len()])
        };
        for (i, v) in regression.into_iter().enumerate() {
            start.push(v);
            let floor = if constant && i == 0 { 0.1 * sd } else { 0.0 };
            steps.push((0.1 * v.abs()).max(floor).max(1e-3));
        }
    }
    start.resize(layout.dims(), 0.0);
    steps.resize(layout.dims(), COEFFICIENT_STEP);

    let n_used = w.len() - layout.conditioning();
    let css = |x: &[f64]| -> f64 {
        let e = residuals(&w, &xw, &layout, &layout.split(x));
        e.iter().map(|v| v * v).sum()
    };
    let opts = NelderMeadOptions::default();
    let result = nelder_mead(css, &start, &steps, opts);
    if !result.converged {
        return Err(ForecastError::Convergence {
            model: format!("SARIMAX{order}"),
            iterations: result.iterations,
        });
    }
    if !result.value.is_finite() {
        return Err(ForecastError::Convergence {
            model: format!("SARIMAX{order}"),
            iterations: result.iterations,
        });
    }

    let params = layout.split(&result.x);
    let e = residuals(&w, &xw, &layout, &params);
    let sigma2 = (result.value / n_used as f64).max(1e-300);
    let log_likelihood = -0.5 * n_used as f64 * ((2.0 * std::f64::consts::PI * sigma2).ln() + 1.0);
    let (aic, bic) = information_criteria(log_likelihood, layout.dims() + 1, w.len() as f64);

    let mut warnings = Vec::new();
    if !is_stable(params.ar) || !is_stable(params.sar) {
        warnings.push(FitWarning::NonStationaryAr);
    }
    let neg = |v: &[f64]| v.iter().map(|c| -c).collect::<Vec<_>>();
    if !is_stable(&neg(params.ma)) || !is_stable(&neg(params.sma)) {
        warnings.push(FitWarning::NonInvertibleMa);
    }

    let state = SarimaxState {
        order,
        constant: constant.then_some(params.constant),
        ar: params.ar.to_vec(),
        ma: params.ma.to_vec(),
        seasonal_ar: params.sar.to_vec(),
        seasonal_ma: params.sma.to_vec(),
        exog_coefficients: params.beta.to_vec(),
        sigma2,
        history: y,
        exog_history: exog_rows.to_vec(),
        residuals: e,
    };
    let spec = if order.s == 0 && width == 0 {
        ModelSpec::Arima { order, constant }
    } else {
        ModelSpec::Sarimax { order, constant }
    };
    let mut fitted = FittedModel::new(spec, ModelState::Sarimax(state), train, Some(result.value));
    fitted.train_meta.log_likelihood = Some(log_likelihood);
    fitted.aic = Some(aic);
    fitted.bic = Some(bic);
    fitted.warnings = warnings;
    Ok(fitted)
}

pub(super) fn forecast(
    state: &SarimaxState,
    horizon: usize,
    future_exog: Option<&[Vec<f64>]>,
) -> Result<Vec<f64>, ForecastError> {
    let lag_list = lags(&state.order);
    let stack = difference_stack(&state.history, &lag_list);
    let mut w = stack.last().expect("nonempty").clone();
    let mut e = state.residuals.clone();
    let nw = w.len();

    let width = state.exog_coefficients.len();
    let future_xw = if width > 0 {
        let future = future_exog.ok_or_else(|| {
            ForecastError::Parameter(format!("model needs {horizon} future exog rows"))
        })?;
        if future.len() < horizon || future.iter().any(|r| r.len() != width) {
            return Err(ForecastError::Parameter(format!(
                "need {horizon} future exog rows of width {width}"
            )));
        }
        let mut all = state.exog_history.clone();
        all.extend_from_slice(&future[..horizon]);
        let diffed = difference_columns(&all, &lag_list);
        diffed[diffed.len() - horizon..].to_vec()
    } else {
        Vec::new()
    };

    let s = state.order.s;
    let ar = expand(&state.ar, &state.seasonal_ar, s, -1.0);
    let ma = expand(&state.ma, &state.seasonal_ma, s, 1.0);
    for h in 0..horizon {
        let t = nw + h;
        let mut pred = state.constant.unwrap_or(0.0);
        if let Some(row) = future_xw.get(h) {
            pred += row.iter().zip(&state.exog_coefficients).map(|(x, b)| x * b).sum::<f64>();
        }
        for &(k, c) in &ar {
            if k <= t {
                pred += c * w[t - k];
            }
        }
        for &(k, c) in &ma {
            if k <= t {
                pred += c * e[t - k];
            }
        }
        w.push(pred);
        e.push(0.0);
    }

    // Undo the differences, innermost last.
    let mut extended = w;
    for (level, &lag) in lag_list.iter().enumerate().rev() {
        let mut below = stack[level].clone();
        let base = below.len();
        for j in 0..horizon {
            let pos = base + j;
            below.push(extended[pos - lag] + below[pos - lag]);
        }
        extended = below;
    }
    Ok(extended[extended.len() - horizon..].to_vec())
}
