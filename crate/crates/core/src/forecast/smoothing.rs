//! Simple, Holt and Holt-Winters exponential smoothing.
//!
//! All four models share one recurrence. The state after observing `y_0` is
//! the initial state; the recursion then runs over `t = 1..n`, using the
//! seasonal estimate for phase `t mod m`.

use rayon::prelude::*;

use super::{FittedModel, ForecastError, InitialState, ModelSpec, ModelState};
use crate::ingest::PriceSeries;

/// Grid points per smoothing parameter: 0.00, 0.01, ..., 1.00.
pub const SMOOTHING_GRID_STEPS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Season {
    None,
    Additive(usize),
    Multiplicative(usize),
}

impl Season {
    fn period(self) -> usize {
        match self {
            Season::None => 0,
            Season::Additive(m) | Season::Multiplicative(m) => m,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Params {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

#[derive(Debug, Clone)]
struct Shape {
    trend: bool,
    season: Season,
}

#[derive(Debug, Clone)]
struct Run {
    sse: f64,
    level: f64,
    trend: f64,
    /// Indexed by phase.
    seasonals: Vec<f64>,
}

fn grid_value(i: usize) -> f64 {
    i as f64 / (SMOOTHING_GRID_STEPS - 1) as f64
}

/// Runs the recurrence. Stops early, returning `None`, once the running SSE
/// exceeds `abort_above`.
fn run(y: &[f64], shape: &Shape, init: &InitialState, p: Params, abort_above: f64) -> Option<Run> {
    let m = shape.season.period();
    let mut level = init.level;
    let mut trend = if shape.trend { init.trend } else { 0.0 };
    let mut seasonals = init.seasonals.clone();
    let mut sse = 0.0;

    for (t, &obs) in y.iter().enumerate().skip(1) {
        let base = level + trend;
        let (fitted, phase) = match shape.season {
            Season::None => (base, 0),
            Season::Additive(_) => (base + seasonals[t % m], t % m),
            Season::Multiplicative(_) => (base * seasonals[t % m], t % m),
        };
        let err = obs - fitted;
        sse += err * err;
        if !(sse <= abort_above) {
            return None;
        }
        let prev_level = level;
        level = match shape.season {
            Season::None => p.alpha * obs + (1.0 - p.alpha) * base,
            Season::Additive(_) => p.alpha * (obs - seasonals[phase]) + (1.0 - p.alpha) * base,
            Season::Multiplicative(_) => {
                p.alpha * (obs / seasonals[phase]) + (1.0 - p.alpha) * base
            }
        };
        if shape.trend {
            trend = p.beta * (level - prev_level) + (1.0 - p.beta) * trend;
        }
        match shape.season {
            Season::None => {}
            Season::Additive(_) => {
                seasonals[phase] = p.gamma * (obs - base) + (1.0 - p.gamma) * seasonals[phase];
            }
            Season::Multiplicative(_) => {
                seasonals[phase] = p.gamma * (obs / base) + (1.0 - p.gamma) * seasonals[phase];
            }
        }
    }
    Some(Run {
        sse,
        level,
        trend,
        seasonals,
    })
}

fn heuristic_init(y: &[f64], shape: &Shape) -> InitialState {
    match shape.season {
        Season::None => InitialState {
            level: y[0],
            trend: if shape.trend { y[1] - y[0] } else { 0.0 },
            seasonals: Vec::new(),
        },
        Season::Additive(m) | Season::Multiplicative(m) => {
            let first = y[..m].iter().sum::<f64>() / m as f64;
            let second = y[m..2 * m].iter().sum::<f64>() / m as f64;
            let seasonals = y[..m]
                .iter()
                .map(|v| match shape.season {
                    Season::Multiplicative(_) => v / first,
                    _ => v - first,
                })
                .collect();
            InitialState {
                level: first,
                trend: (second - first) / m as f64,
                seasonals,
            }
        }
    }
}

/// Searches unset parameters over the 0.01 grid, minimizing in-sample
/// one-step SSE. Ties keep the lexicographically smallest `(alpha, beta, gamma)`.
fn optimize(
    y: &[f64],
    shape: &Shape,
    init: &InitialState,
    alpha: Option<f64>,
    beta: Option<f64>,
    gamma: Option<f64>,
) -> Option<(Params, Run)> {
    let axis = |fixed: Option<f64>, used: bool| -> Vec<f64> {
        match (fixed, used) {
            (Some(v), _) => vec![v],
            (None, true) => (0..SMOOTHING_GRID_STEPS).map(grid_value).collect(),
            (None, false) => vec![0.0],
        }
    };
    let alphas = axis(alpha, true);
    let betas = axis(beta, shape.trend);
    let gammas = axis(gamma, shape.season != Season::None);

    let best_per_alpha: Vec<Option<(Params, Run)>> = alphas
        .par_iter()
        .map(|&a| {
            let mut best: Option<(Params, Run)> = None;
            for &b in &betas {
                for &g in &gammas {
                    let p = Params {
                        alpha: a,
                        beta: b,
                        gamma: g,
                    };
                    let bound = best.as_ref().map_or(f64::INFINITY, |(_, r)| r.sse);
                    if let Some(r) = run(y, shape, init, p, bound) {
                        if best.as_ref().is_none_or(|(_, cur)| r.sse < cur.sse) {
                            best = Some((p, r));
                        }
                    }
                }
            }
            best
        })
        .collect();

    let mut best: Option<(Params, Run)> = None;
    for candidate in best_per_alpha.into_iter().flatten() {
        if best.as_ref().is_none_or(|(_, cur)| candidate.1.sse < cur.sse) {
            best = Some(candidate);
        }
    }
    best
}

pub(super) fn forecast_step(level: f64, trend: f64, seasonals: &[f64], multiplicative: bool, h: usize) -> f64 {
    let base = level + h as f64 * trend;
    if seasonals.is_empty() {
        base
    } else if multiplicative {
        base * seasonals[(h - 1) % seasonals.len()]
    } else {
        base + seasonals[(h - 1) % seasonals.len()]
    }
}

/// Fits simple, Holt or Holt-Winters exponential smoothing.
pub fn fit_smoothing(spec: &ModelSpec, train: &PriceSeries) -> Result<FittedModel, ForecastError> {
    let (alpha, beta, gamma, shape, init) = match spec {
        ModelSpec::Ses { alpha, init } => (
            *alpha,
            None,
            None,
            Shape {
                trend: false,
                season: Season::None,
            },
            init,
        ),
        ModelSpec::Holt { alpha, beta, init } => (
            *alpha,
            *beta,
            None,
            Shape {
                trend: true,
                season: Season::None,
            },
            init,
        ),
        ModelSpec::HoltWintersAdditive {
            alpha,
            beta,
            gamma,
            seasonal_period,
            init,
        } => (
            *alpha,
            *beta,
            *gamma,
            Shape {
                trend: true,
                season: Season::Additive(*seasonal_period),
            },
            init,
        ),
        ModelSpec::HoltWintersMultiplicative {
            alpha,
            beta,
            gamma,
            seasonal_period,
            init,
        } => (
            *alpha,
            *beta,
            *gamma,
            Shape {
                trend: true,
                season: Season::Multiplicative(*seasonal_period),
            },
            init,
        ),
        other => {
            return Err(ForecastError::Parameter(format!(
                "{} is not a smoothing model",
                other.family()
            )))
        }
    };
    spec.validate()?;

    let y = train.values();
    let m = shape.season.period();
    let needed = if m > 0 { 2 * m } else { 2 };
    if y.len() < needed {
        return Err(ForecastError::InsufficientData {
            needed,
            have: y.len(),
        });
    }
    if let Season::Multiplicative(_) = shape.season {
        if let Some((index, &value)) = y.iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(ForecastError::Positivity { index, value });
        }
    }

    let init = match init {
        Some(given) => {
            if given.seasonals.len() != m {
                return Err(ForecastError::Parameter(format!(
                    "initial state has {} seasonal values, expected {m}",
                    given.seasonals.len()
                )));
            }
            given.clone()
        }
        None => heuristic_init(&y, &shape),
    };

    let (params, fit) = optimize(&y, &shape, &init, alpha, beta, gamma).ok_or_else(|| {
        ForecastError::Convergence {
            model: spec.label(),
            iterations: 0,
        }
    })?;

    let n = y.len();
    let seasonals: Vec<f64> = (0..m).map(|i| fit.seasonals[(n + i) % m]).collect();
    let multiplicative = matches!(shape.season, Season::Multiplicative(_));

    let filled = match spec.clone() {
        ModelSpec::Ses { init, .. } => ModelSpec::Ses {
            alpha: Some(params.alpha),
            init,
        },
        ModelSpec::Holt { init, .. } => ModelSpec::Holt {
            alpha: Some(params.alpha),
            beta: Some(params.beta),
            init,
        },
        ModelSpec::HoltWintersAdditive {
            seasonal_period,
            init,
            ..
        } => ModelSpec::HoltWintersAdditive {
            alpha: Some(params.alpha),
            beta: Some(params.beta),
            gamma: Some(params.gamma),
            seasonal_period,
            init,
        },
        ModelSpec::HoltWintersMultiplicative {
            seasonal_period,
            init,
            ..
        } => ModelSpec::HoltWintersMultiplicative {
            alpha: Some(params.alpha),
            beta: Some(params.beta),
            gamma: Some(params.gamma),
            seasonal_period,
            init,
        },
        _ => unreachable!("matched above"),
    };
    let state = ModelState::Smoothing {
        level: fit.level,
        trend: fit.trend,
        seasonals,
        multiplicative,
    };
    Ok(FittedModel::new(filled, state, train, Some(fit.sse)))
}
