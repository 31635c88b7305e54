use serde::{Deserialize, Serialize};

use super::{net_profit_per_kg, CropEconomics, FarmScenario, FieldError, PortfolioError};

/// On-disk scenario. Profit per kg comes from `net_profit_per_kg_inr` when
/// present, otherwise from the forecast price minus the cost price.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub total_land_acres: f64,
    pub budget_inr: f64,
    pub storage_kg: f64,
    pub crops: Vec<ScenarioCrop>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioCrop {
    pub name: String,
    pub cost_per_acre_inr: f64,
    pub yield_kg_per_acre: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_price_per_kg_inr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub forecast_price_per_kg_inr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub net_profit_per_kg_inr: Option<f64>,
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Crops that still need a forecast price.
    pub fn missing_prices(&self) -> Vec<&str> {
        self.crops
            .iter()
            .filter(|c| c.net_profit_per_kg_inr.is_none() && c.forecast_price_per_kg_inr.is_none())
            .map(|c| c.name.as_str())
            .collect()
    }

    /// `forecast_price` is consulted for crops that carry neither a profit
    /// nor a forecast price.
    pub fn resolve(&self, forecast_price: impl Fn(&str) -> Option<f64>) -> Result<FarmScenario, PortfolioError> {
        let mut errors = Vec::new();
        let mut crops = Vec::with_capacity(self.crops.len());
        for (i, c) in self.crops.iter().enumerate() {
            let profit = match (c.net_profit_per_kg_inr, c.forecast_price_per_kg_inr, c.cost_price_per_kg_inr) {
                (Some(p), _, _) => Some(p),
                (None, price, Some(cost)) => match price.or_else(|| forecast_price(&c.name)) {
                    Some(price) => Some(net_profit_per_kg(price, cost)),
                    None => {
                        errors.push(FieldError::new(
                            format!("crops[{i}].forecast_price_per_kg_inr"),
                            format!("no forecast price available for `{}`", c.name),
                        ));
                        None
                    }
                },
                (None, _, None) => {
                    errors.push(FieldError::new(
                        format!("crops[{i}].cost_price_per_kg_inr"),
                        "required unless net_profit_per_kg_inr is given",
                    ));
                    None
                }
            };
            crops.push(CropEconomics {
                crop: c.name.clone(),
                cost_per_acre: c.cost_per_acre_inr,
                yield_per_acre: c.yield_kg_per_acre,
                net_profit_per_kg: profit.unwrap_or(0.0),
            });
        }
        let scenario = FarmScenario::new(crops, self.total_land_acres, self.budget_inr, self.storage_kg);
        match scenario {
            Ok(s) if errors.is_empty() => Ok(s),
            Ok(_) => Err(PortfolioError::Invalid(errors)),
            Err(PortfolioError::Invalid(more)) => {
                errors.extend(more.into_iter().map(rename_field));
                Err(PortfolioError::Invalid(errors))
            }
            Err(e) => Err(e),
        }
    }
}

/// Maps validation field names back to the file's vocabulary.
fn rename_field(mut e: FieldError) -> FieldError {
    const NAMES: [(&str, &str); 6] = [
        ("total_land", "total_land_acres"),
        ("budget", "budget_inr"),
        ("storage", "storage_kg"),
        (".cost_per_acre", ".cost_per_acre_inr"),
        (".yield_per_acre", ".yield_kg_per_acre"),
        (".crop", ".name"),
    ];
    for (from, to) in NAMES {
        if e.field == from || (from.starts_with('.') && e.field.ends_with(from)) {
            e.field = format!("{}{to}", &e.field[..e.field.len() - from.len()]);
            break;
        }
    }
    e
}
