//! Acreage allocation as a linear program over budget, storage and land.

mod scenario_file;
mod simplex;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::forecast::Forecast;

pub use scenario_file::{ScenarioCrop, ScenarioFile};
pub use simplex::{solve_lp, Constraint, LinearProgram, LpSolution, LpStatus};

pub const BUDGET: &str = "budget";
pub const STORAGE: &str = "storage";
pub const LAND: &str = "land";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

impl FieldError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PortfolioError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("simplex exceeded its iteration cap after {iterations} pivots")]
    SolverFailure { iterations: usize },
    #[error("invalid scenario: {}", summarize(.0))]
    Invalid(Vec<FieldError>),
}

fn summarize(errors: &[FieldError]) -> String {
    errors
        .iter()
        .map(|e| format!("{}: {}", e.field, e.message))
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropEconomics {
    pub crop: String,
    pub cost_per_acre: f64,
    pub yield_per_acre: f64,
    /// May be negative.
    pub net_profit_per_kg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarmScenario {
    crops: Vec<CropEconomics>,
    total_land: f64,
    budget: f64,
    storage: f64,
}

fn positive(errors: &mut Vec<FieldError>, field: String, v: f64) {
    if !(v.is_finite() && v > 0.0) {
        errors.push(FieldError::new(field, format!("must be a positive number, got {v}")));
    }
}

impl FarmScenario {
    pub fn new(crops: Vec<CropEconomics>, total_land: f64, budget: f64, storage: f64) -> Result<Self, PortfolioError> {
        let mut errors = Vec::new();
        positive(&mut errors, "total_land".into(), total_land);
        positive(&mut errors, "budget".into(), budget);
        positive(&mut errors, "storage".into(), storage);
        if crops.is_empty() {
            errors.push(FieldError::new("crops", "at least one crop is required"));
        }
        for (i, c) in crops.iter().enumerate() {
            if c.crop.trim().is_empty() {
                errors.push(FieldError::new(format!("crops[{i}].crop"), "name is empty"));
            }
            if crops[..i].iter().any(|o| o.crop == c.crop) {
                errors.push(FieldError::new(format!("crops[{i}].crop"), format!("duplicate crop `{}`", c.crop)));
            }
            positive(&mut errors, format!("crops[{i}].cost_per_acre"), c.cost_per_acre);
            positive(&mut errors, format!("crops[{i}].yield_per_acre"), c.yield_per_acre);
            if !c.net_profit_per_kg.is_finite() {
                errors.push(FieldError::new(format!("crops[{i}].net_profit_per_kg"), "must be finite"));
            }
        }
        if !errors.is_empty() {
            return Err(PortfolioError::Invalid(errors));
        }
        Ok(Self {
            crops,
            total_land,
            budget,
            storage,
        })
    }

    pub fn crops(&self) -> &[CropEconomics] {
        &self.crops
    }

    pub fn total_land(&self) -> f64 {
        self.total_land
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    pub fn storage(&self) -> f64 {
        self.storage
    }
}

pub fn net_profit_per_kg(forecast_price: f64, cost_price: f64) -> f64 {
    forecast_price - cost_price
}

/// How a forecast curve becomes one sale price.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum PriceAggregation {
    #[default]
    HorizonMean,
    /// 1-based week within the forecast horizon, clamped to its length.
    SaleWeek { week: usize },
}

impl PriceAggregation {
    pub fn apply(self, forecast: &Forecast) -> Option<f64> {
        match self {
            Self::HorizonMean => (!forecast.points.is_empty()).then(|| forecast.mean()),
            Self::SaleWeek { week } => {
                let i = week.max(1).min(forecast.points.len());
                forecast.points.get(i.checked_sub(1)?).map(|p| p.price)
            }
        }
    }
}

pub fn build_lp(scenario: &FarmScenario) -> LinearProgram {
    let crops = &scenario.crops;
    let row = |name: &str, f: &dyn Fn(&CropEconomics) -> f64, rhs: f64| Constraint {
        name: name.to_string(),
        coefficients: crops.iter().map(f).collect(),
        rhs,
    };
    LinearProgram {
        variables: crops.iter().map(|c| c.crop.clone()).collect(),
        objective: crops.iter().map(|c| c.yield_per_acre * c.net_profit_per_kg).collect(),
        constraints: vec![
            row(BUDGET, &|c| c.cost_per_acre, scenario.budget),
            row(STORAGE, &|c| c.yield_per_acre, scenario.storage),
            row(LAND, &|_| 1.0, scenario.total_land),
        ],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintUsage {
    pub name: String,
    pub used: f64,
    pub limit: f64,
    pub slack: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PortfolioSolution {
    pub status: LpStatus,
    pub acres: IndexMap<String, f64>,
    pub objective_inr: f64,
    pub binding: Vec<String>,
    pub constraints: Vec<ConstraintUsage>,
}

pub fn is_binding(slack: f64, rhs: f64) -> bool {
    slack <= 1e-6 * (1.0 + rhs.abs())
}

pub fn solve_portfolio(scenario: &FarmScenario) -> Result<PortfolioSolution, PortfolioError> {
    let lp = build_lp(scenario);
    let raw = solve_lp(&lp)?;
    let acres = lp.variables.iter().cloned().zip(raw.values.iter().copied()).collect();
    let (constraints, binding) = if raw.status == LpStatus::Optimal {
        let usage: Vec<ConstraintUsage> = lp
            .constraints
            .iter()
            .map(|c| {
                let used: f64 = c.coefficients.iter().zip(&raw.values).map(|(a, x)| a * x).sum();
                ConstraintUsage {
                    name: c.name.clone(),
                    used,
                    limit: c.rhs,
                    slack: c.rhs - used,
                }
            })
            .collect();
        let binding = usage
            .iter()
            .filter(|u| is_binding(u.slack, u.limit))
            .map(|u| u.name.clone())
            .collect();
        (usage, binding)
    } else {
        (Vec::new(), Vec::new())
    };
    Ok(PortfolioSolution {
        status: raw.status,
        acres,
        objective_inr: if raw.status == LpStatus::Optimal { raw.objective } else { 0.0 },
        binding,
        constraints,
    })
}
