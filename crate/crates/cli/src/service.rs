//! JSON-over-HTTP facade over cached champions and the portfolio solver.

use std::collections::HashMap;
use std::sync::Arc;

use agriplan_core::evaluate::{CvReport, Leaderboard};
use agriplan_core::forecast::{predict, Forecast, ModelSpec};
use agriplan_core::ingest::PriceSeries;
use agriplan_core::portfolio::{
    solve_portfolio, FieldError, PortfolioError, PortfolioSolution, PriceAggregation, ScenarioCrop, ScenarioFile,
};
use axum::extract::rejection::JsonRejection;
use axum::extract::{Path, Query, State};
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::pipeline::{self, ChampionArtifact, EvaluationOutcome};

/// Economics defaults shipped with the binary.
pub const BUNDLED_ECONOMICS: &str = include_str!("../data/economics.json");
pub const DEFAULT_HORIZON: usize = 52;

pub fn bundled_economics() -> ScenarioFile {
    ScenarioFile::from_json(BUNDLED_ECONOMICS).expect("bundled economics file is valid")
}

#[derive(Debug, Clone)]
pub struct CropEntry {
    pub name: String,
    pub defaults: Option<ScenarioCrop>,
    pub series: Option<PriceSeries>,
    pub evaluation: Option<EvaluationOutcome>,
}

/// Immutable after construction; shared across requests.
#[derive(Debug, Clone)]
pub struct AppState {
    pub economics: ScenarioFile,
    pub crops: Vec<CropEntry>,
}

fn read_json<T: serde::de::DeserializeOwned>(path: &std::path::Path) -> Option<T> {
    serde_json::from_str(&std::fs::read_to_string(path).ok()?).ok()
}

/// Reuses artifacts from an earlier `run` when they match the series.
fn cached_evaluation(config: &PipelineConfig, series: &PriceSeries) -> Option<EvaluationOutcome> {
    let dir = config.crop_dir(series.crop());
    let champion: ChampionArtifact = read_json(&dir.join(pipeline::CHAMPION_FILE))?;
    let leaderboard: Leaderboard = read_json(&dir.join(pipeline::LEADERBOARD_FILE))?;
    let cv: Vec<CvReport> = read_json(&dir.join(pipeline::CV_FILE))?;
    let meta = &champion.fitted.train_meta;
    (meta.train_len == series.len() && meta.last_date == series.last_date()).then_some(EvaluationOutcome {
        leaderboard,
        cv,
        champion,
    })
}

impl AppState {
    /// Loads every bundled or configured crop and fits (or reloads) its
    /// champion. Crops without data are listed as unavailable.
    pub fn build(config: &PipelineConfig) -> Self {
        let economics = bundled_economics();
        let mut names: Vec<String> = economics.crops.iter().map(|c| c.name.clone()).collect();
        for c in &config.crops {
            if !names.iter().any(|n| n.eq_ignore_ascii_case(c)) {
                names.push(c.clone());
            }
        }
        let crops = names
            .par_iter()
            .map(|name| {
                let series = pipeline::load_series(config, name)
                    .map_err(|e| tracing::info!("{e}"))
                    .ok();
                let evaluation = series.as_ref().and_then(|s| {
                    cached_evaluation(config, s).or_else(|| match pipeline::evaluate_series(config, s) {
                        Ok((ev, _)) => Some(ev),
                        Err(e) => {
                            tracing::warn!("{e}");
                            None
                        }
                    })
                });
                CropEntry {
                    name: name.clone(),
                    defaults: economics.crops.iter().find(|c| &c.name == name).cloned(),
                    series,
                    evaluation,
                }
            })
            .collect();
        Self { economics, crops }
    }

    fn crop(&self, name: &str) -> Option<&CropEntry> {
        self.crops
            .iter()
            .find(|c| c.name == name)
            .or_else(|| self.crops.iter().find(|c| c.name.eq_ignore_ascii_case(name)))
    }

    fn champion_forecast(&self, name: &str, horizon: usize) -> Option<(&ChampionArtifact, Forecast)> {
        let champion = &self.crop(name)?.evaluation.as_ref()?.champion;
        let forecast = predict(&champion.fitted, horizon).ok()?;
        Some((champion, forecast))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBody {
    pub code: String,
    pub message: String,
    pub field_errors: Vec<FieldError>,
}

#[derive(Debug)]
pub struct ApiError {
    status: StatusCode,
    body: ErrorBody,
}

impl ApiError {
    fn new(status: StatusCode, code: &str, message: impl Into<String>) -> Self {
        Self {
            status,
            body: ErrorBody {
                code: code.into(),
                message: message.into(),
                field_errors: Vec::new(),
            },
        }
    }

    fn not_found(message: impl Into<String>) -> Self {
        Self::new(StatusCode::NOT_FOUND, "not_found", message)
    }

    fn validation(field_errors: Vec<FieldError>) -> Self {
        let mut e = Self::new(StatusCode::BAD_REQUEST, "validation_failed", "request failed validation");
        e.body.field_errors = field_errors;
        e
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        (self.status, Json(self.body)).into_response()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropSummary {
    pub crop: String,
    pub defaults: Option<ScenarioCrop>,
    pub data_available: bool,
    pub champion: Option<String>,
}

async fn get_crops(State(state): State<Arc<AppState>>) -> Json<Vec<CropSummary>> {
    Json(
        state
            .crops
            .iter()
            .map(|c| CropSummary {
                crop: c.name.clone(),
                defaults: c.defaults.clone(),
                data_available: c.series.is_some(),
                champion: c.evaluation.as_ref().map(|e| e.champion.label.clone()),
            })
            .collect(),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForecastResponse {
    pub crop: String,
    pub champion: ModelSpec,
    pub champion_label: String,
    pub horizon: usize,
    pub points: Vec<agriplan_core::PricePoint>,
}

fn parse_horizon(query: &HashMap<String, String>) -> Result<usize, ApiError> {
    let Some(raw) = query.get("h") else {
        return Ok(DEFAULT_HORIZON);
    };
    match raw.parse::<usize>() {
        Ok(h) if h >= 1 => Ok(h),
        _ => Err(ApiError::validation(vec![FieldError::new(
            "h",
            format!("horizon must be an integer >= 1, got `{raw}`"),
        )])),
    }
}

async fn get_forecast(
    State(state): State<Arc<AppState>>,
    Path(crop): Path<String>,
    Query(query): Query<HashMap<String, String>>,
) -> Result<Json<ForecastResponse>, ApiError> {
    let horizon = parse_horizon(&query)?;
    let entry = state.crop(&crop).ok_or_else(|| ApiError::not_found(format!("unknown crop `{crop}`")))?;
    let champion = &entry
        .evaluation
        .as_ref()
        .ok_or_else(|| ApiError::not_found(format!("no fitted model for `{}`", entry.name)))?
        .champion;
    let forecast = predict(&champion.fitted, horizon)
        .map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "forecast_failed", e.to_string()))?;
    Ok(Json(ForecastResponse {
        crop: entry.name.clone(),
        champion: champion.model.clone(),
        champion_label: champion.label.clone(),
        horizon,
        points: forecast.points,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeaderboardResponse {
    pub crop: String,
    pub champion: String,
    pub leaderboard: Leaderboard,
    pub cv: Vec<CvReport>,
}

async fn get_leaderboard(
    State(state): State<Arc<AppState>>,
    Path(crop): Path<String>,
) -> Result<Json<LeaderboardResponse>, ApiError> {
    let entry = state.crop(&crop).ok_or_else(|| ApiError::not_found(format!("unknown crop `{crop}`")))?;
    let ev = entry
        .evaluation
        .as_ref()
        .ok_or_else(|| ApiError::not_found(format!("no leaderboard for `{}`", entry.name)))?;
    Ok(Json(LeaderboardResponse {
        crop: entry.name.clone(),
        champion: ev.champion.label.clone(),
        leaderboard: ev.leaderboard.clone(),
        cv: ev.cv.clone(),
    }))
}

/// A what-if scenario. Omitted totals, crops, or per-crop fields fall back
/// to the bundled defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioRequest {
    pub total_land_acres: Option<f64>,
    pub budget_inr: Option<f64>,
    pub storage_kg: Option<f64>,
    pub crops: Option<Vec<RequestCrop>>,
    pub horizon_weeks: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestCrop {
    pub name: String,
    pub cost_per_acre_inr: Option<f64>,
    pub yield_kg_per_acre: Option<f64>,
    pub cost_price_per_kg_inr: Option<f64>,
    pub forecast_price_per_kg_inr: Option<f64>,
    pub net_profit_per_kg_inr: Option<f64>,
}

impl ScenarioRequest {
    /// Fills gaps from `defaults`. A request that prices a crop itself
    /// (cost or forecast price) drops the default profit for that crop.
    pub fn merge(&self, defaults: &ScenarioFile) -> Result<ScenarioFile, Vec<FieldError>> {
        let mut errors = Vec::new();
        let crops = match &self.crops {
            None => defaults.crops.clone(),
            Some(list) => list
                .iter()
                .enumerate()
                .map(|(i, c)| {
                    let base = defaults.crops.iter().find(|d| d.name.eq_ignore_ascii_case(&c.name));
                    let mut field = |name: &str, own: Option<f64>, fallback: Option<f64>| {
                        own.or(fallback).unwrap_or_else(|| {
                            errors.push(FieldError::new(format!("crops[{i}].{name}"), "required for crops without defaults"));
                            f64::NAN
                        })
                    };
                    let cost = field("cost_per_acre_inr", c.cost_per_acre_inr, base.map(|b| b.cost_per_acre_inr));
                    let yld = field("yield_kg_per_acre", c.yield_kg_per_acre, base.map(|b| b.yield_kg_per_acre));
                    let priced_here = c.cost_price_per_kg_inr.is_some() || c.forecast_price_per_kg_inr.is_some();
                    let net = c
                        .net_profit_per_kg_inr
                        .or_else(|| if priced_here { None } else { base.and_then(|b| b.net_profit_per_kg_inr) });
                    ScenarioCrop {
                        name: c.name.clone(),
                        cost_per_acre_inr: cost,
                        yield_kg_per_acre: yld,
                        cost_price_per_kg_inr: c.cost_price_per_kg_inr.or(base.and_then(|b| b.cost_price_per_kg_inr)),
                        forecast_price_per_kg_inr: c.forecast_price_per_kg_inr,
                        net_profit_per_kg_inr: net,
                    }
                })
                .collect(),
        };
        if self.horizon_weeks == Some(0) {
            errors.push(FieldError::new("horizon_weeks", "must be at least 1"));
        }
        if !errors.is_empty() {
            return Err(errors);
        }
        Ok(ScenarioFile {
            total_land_acres: self.total_land_acres.unwrap_or(defaults.total_land_acres),
            budget_inr: self.budget_inr.unwrap_or(defaults.budget_inr),
            storage_kg: self.storage_kg.unwrap_or(defaults.storage_kg),
            crops,
        })
    }
}

/// The library call behind `POST /api/portfolio/solve`.
pub fn solve_request(state: &AppState, request: &ScenarioRequest) -> Result<PortfolioSolution, ApiError> {
    let scenario = request.merge(&state.economics).map_err(ApiError::validation)?;
    let horizon = request.horizon_weeks.unwrap_or(DEFAULT_HORIZON);
    let price = |name: &str| {
        let (_, f) = state.champion_forecast(name, horizon)?;
        PriceAggregation::HorizonMean.apply(&f)
    };
    let farm = scenario.resolve(price).map_err(|e| match e {
        PortfolioError::Invalid(fields) => ApiError::validation(fields),
        other => ApiError::new(StatusCode::UNPROCESSABLE_ENTITY, "invalid_scenario", other.to_string()),
    })?;
    solve_portfolio(&farm).map_err(|e| ApiError::new(StatusCode::INTERNAL_SERVER_ERROR, "solver_failure", e.to_string()))
}

async fn post_solve(
    State(state): State<Arc<AppState>>,
    body: Result<Json<ScenarioRequest>, JsonRejection>,
) -> Result<Json<PortfolioSolution>, ApiError> {
    let Json(request) = body.map_err(|e| ApiError::new(StatusCode::BAD_REQUEST, "invalid_json", e.body_text()))?;
    // the simplex is CPU-bound but tiny; no need to leave the async worker
    solve_request(&state, &request).map(Json)
}

pub fn router(state: Arc<AppState>) -> Router {
    Router::new()
        .route("/api/crops", get(get_crops))
        .route("/api/forecast/{crop}", get(get_forecast))
        .route("/api/leaderboard/{crop}", get(get_leaderboard))
        .route("/api/portfolio/solve", post(post_solve))
        .with_state(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundle_has_the_four_crops() {
        let b = bundled_economics();
        let names: Vec<&str> = b.crops.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(names, ["Jowar", "Rice", "Maize", "Urad"]);
        assert_eq!((b.total_land_acres, b.budget_inr, b.storage_kg), (20.0, 200000.0, 40000.0));
    }

    #[test]
    fn merge_rules() {
        let defaults = bundled_economics();
        let req = ScenarioRequest {
            budget_inr: Some(100000.0),
            crops: Some(vec![
                RequestCrop {
                    name: "maize".into(),
                    cost_price_per_kg_inr: Some(10.0),
                    ..Default::default()
                },
                RequestCrop {
                    name: "Urad".into(),
                    ..Default::default()
                },
            ]),
            ..Default::default()
        };
        let merged = req.merge(&defaults).unwrap();
        assert_eq!(merged.budget_inr, 100000.0);
        assert_eq!(merged.total_land_acres, 20.0);
        assert_eq!(merged.crops[0].cost_per_acre_inr, 15000.0);
        assert_eq!(merged.crops[0].net_profit_per_kg_inr, None);
        assert_eq!(merged.crops[1].net_profit_per_kg_inr, Some(34.72));

        let unknown = ScenarioRequest {
            crops: Some(vec![RequestCrop {
                name: "Wheat".into(),
                ..Default::default()
            }]),
            horizon_weeks: Some(0),
            ..Default::default()
        };
        let fields: Vec<String> = unknown.merge(&defaults).unwrap_err().into_iter().map(|e| e.field).collect();
        assert_eq!(fields, ["crops[0].cost_per_acre_inr", "crops[0].yield_kg_per_acre", "horizon_weeks"]);
    }
}
