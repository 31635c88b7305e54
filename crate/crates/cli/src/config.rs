use std::path::{Path, PathBuf};

use agriplan_core::forecast::{Criterion, OrderGrid, WEEKLY_SEASONAL_PERIOD};
use agriplan_core::ingest::{ColumnMap, GapPolicy};
use agriplan_core::portfolio::PriceAggregation;
use agriplan_core::synthetic;
use serde::{Deserialize, Serialize};

pub const OUTPUT_DIR_ENV: &str = "AGRIPLAN_OUTPUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parsing config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Everything a pipeline run needs. Missing JSON fields take the defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Holds `<Crop>.csv` series files or raw exports under `raw/`.
    pub data_dir: PathBuf,
    pub output_dir: PathBuf,
    pub crops: Vec<String>,
    /// Inclusive calendar years kept from raw data.
    pub year_range: Option<(i32, i32)>,
    pub gap_policy: GapPolicy,
    pub columns: ColumnMap,
    pub test_fraction: f64,
    pub cv_folds: usize,
    pub seasonal_period: usize,
    pub moving_average_window: usize,
    /// Grid for the non-seasonal ARIMA row; seasonal fields are ignored.
    pub arima_grid: OrderGrid,
    pub sarimax_grid: OrderGrid,
    pub criterion: Criterion,
    pub horizon: usize,
    pub price_aggregation: PriceAggregation,
    /// Portfolio scenario solved after forecasting.
    pub scenario: Option<PathBuf>,
    /// Generate seeded series instead of reading `data_dir`.
    pub synthetic: bool,
    pub synthetic_length: usize,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            data_dir: PathBuf::from("data"),
            output_dir: PathBuf::from("output"),
            crops: ["Jowar", "Rice", "Maize", "Urad"].map(String::from).to_vec(),
            year_range: Some((2012, 2016)),
            gap_policy: GapPolicy::default(),
            columns: ColumnMap::default(),
            test_fraction: 0.2,
            cv_folds: 4,
            seasonal_period: WEEKLY_SEASONAL_PERIOD,
            moving_average_window: 4,
            arima_grid: OrderGrid::nonseasonal(vec![0, 1, 2], vec![0, 1], vec![0, 1]),
            sarimax_grid: OrderGrid {
                seasonal_p: vec![0, 1],
                seasonal_d: vec![0, 1],
                seasonal_q: vec![0],
                s: WEEKLY_SEASONAL_PERIOD,
                ..OrderGrid::nonseasonal(vec![0, 1], vec![0, 1], vec![0, 1])
            },
            criterion: Criterion::Aic,
            horizon: 52,
            price_aggregation: PriceAggregation::default(),
            scenario: None,
            synthetic: false,
            synthetic_length: synthetic::DEFAULT_LENGTH,
            seed: synthetic::DEFAULT_SEED,
        }
    }
}

impl PipelineConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_owned(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_owned(),
            source,
        })
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.cv_folds < 2 {
            return bad(format!("cv_folds must be at least 2, got {}", self.cv_folds));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return bad(format!("test_fraction must be in (0, 1), got {}", self.test_fraction));
        }
        if self.crops.is_empty() {
            return bad("crops is empty".into());
        }
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.moving_average_window == 0 {
            return bad("moving_average_window must be at least 1".into());
        }
        if self.seasonal_period < 2 {
            return bad(format!("seasonal_period must be at least 2, got {}", self.seasonal_period));
        }
        if let Some((a, b)) = self.year_range {
            if a > b {
                return bad(format!("year_range start {a} is after end {b}"));
            }
        }
        if !self.synthetic && !self.data_dir.is_dir() {
            return bad(format!("data_dir {} does not exist", self.data_dir.display()));
        }
        if let Some(s) = &self.scenario {
            if !s.is_file() {
                return bad(format!("scenario file {} does not exist", s.display()));
            }
        }
        Ok(())
    }

    pub fn crop_dir(&self, crop: &str) -> PathBuf {
        self.output_dir.join(crop)
    }
}
