//! Weekly crop-price forecasting and acreage planning.
//!
//! The pipeline runs raw market records through [`ingest`] into a weekly
//! [`PriceSeries`], checks it with [`series`], fits and compares the model
//! families in [`forecast`] and [`evaluate`], and feeds the winning forecast
//! into the linear program in [`portfolio`].

pub mod evaluate;
pub mod forecast;
pub mod ingest;
mod ols;
pub mod portfolio;
pub mod series;
pub mod synthetic;

pub use evaluate::{CvReport, Leaderboard, MetricReport};
pub use forecast::{Forecast, FittedModel, ModelSpec, SarimaxOrder};
pub use ingest::{PricePoint, PriceSeries, RawPriceRecord, WeeklyPriceSummary};
pub use portfolio::{CropEconomics, FarmScenario, LinearProgram, PortfolioSolution};
pub use series::{SplitSpec, StationarityReport};
