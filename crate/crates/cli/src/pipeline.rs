//! The per-crop workflow: load a weekly series, test stationarity, score the
//! model catalog, pick a champion, forecast, and optionally plan acreage.

use std::fmt;
use std::path::{Path, PathBuf};

use agriplan_core::evaluate::{
    evaluate_all_detailed, plot_data_csv, rolling_cross_validate, select_champion, CvReport, Leaderboard,
};
use agriplan_core::forecast::{
    fit, model_catalog, predict, select_order, FittedModel, Forecast, ModelSpec, OrderGrid, SarimaxOrder, SelectedOrder,
};
use agriplan_core::ingest::{
    aggregate_weekly, build_price_series, parse_raw_csv, read_series_csv, write_series_csv, PriceSeries,
};
use agriplan_core::portfolio::{solve_portfolio, PortfolioSolution, ScenarioFile};
use agriplan_core::series::{adf_stationarity, default_max_lag, train_test_split, StationarityReport};
use agriplan_core::synthetic;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;

pub const SERIES_FILE: &str = "series.csv";
pub const STATIONARITY_FILE: &str = "stationarity.json";
pub const LEADERBOARD_FILE: &str = "leaderboard.json";
pub const CV_FILE: &str = "cv_report.json";
pub const CHAMPION_FILE: &str = "champion.json";
pub const FORECAST_FILE: &str = "forecast.json";
pub const PLOTS_DIR: &str = "plots";
pub const SOLUTION_FILE: &str = "portfolio_solution.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Ingest,
    Eda,
    Evaluate,
    Forecast,
    Optimize,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Ingest => "ingest",
            Stage::Eda => "eda",
            Stage::Evaluate => "evaluate",
            Stage::Forecast => "forecast",
            Stage::Optimize => "optimize",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageError {
    pub stage: Stage,
    pub crop: Option<String>,
    pub message: String,
}

impl StageError {
    fn new(stage: Stage, crop: Option<&str>, message: impl fmt::Display) -> Self {
        Self {
            stage,
            crop: crop.map(str::to_string),
            message: message.to_string(),
        }
    }
}

impl fmt::Display for StageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.crop {
            Some(c) => write!(f, "[{}] {c}: {}", self.stage, self.message),
            None => write!(f, "[{}] {}", self.stage, self.message),
        }
    }
}

type StageResult<T> = Result<T, StageError>;

/// Writes through a sibling temporary file and a rename, so readers never
/// see a half-written artifact.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serializes");
    s.push('\n');
    s
}

fn write_artifact(stage: Stage, crop: &str, path: &Path, contents: &str) -> StageResult<()> {
    write_atomic(path, contents)
        .map_err(|e| StageError::new(stage, Some(crop), format!("writing {}: {e}", path.display())))
}

fn raw_files(dir: &Path) -> std::io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("csv")))
        .collect();
    files.sort();
    Ok(files)
}

/// Loads a crop's weekly series: generated when `synthetic` is set, else
/// `<data_dir>/<crop>.csv` in series format, else the raw exports in
/// `<data_dir>/raw/`.
pub fn load_series(config: &PipelineConfig, crop: &str) -> StageResult<PriceSeries> {
    let err = |m: String| StageError::new(Stage::Ingest, Some(crop), m);
    if config.synthetic {
        return synthetic::seasonal_trend(crop, config.synthetic_length, config.seed).map_err(|e| err(e.to_string()));
    }
    let series_path = config.data_dir.join(format!("{crop}.csv"));
    if series_path.is_file() {
        let text = std::fs::read_to_string(&series_path).map_err(|e| err(format!("{}: {e}", series_path.display())))?;
        return read_series_csv(crop, &text).map_err(|e| err(format!("{}: {e}", series_path.display())));
    }
    let raw_dir = config.data_dir.join("raw");
    if !raw_dir.is_dir() {
        return Err(err(format!(
            "no {} and no raw/ directory in data_dir {}",
            series_path.display(),
            config.data_dir.display()
        )));
    }
    let mut records = Vec::new();
    for path in raw_files(&raw_dir).map_err(|e| err(format!("{}: {e}", raw_dir.display())))? {
        let text = std::fs::read_to_string(&path).map_err(|e| err(format!("{}: {e}", path.display())))?;
        let outcome = parse_raw_csv(&text, &config.columns).map_err(|e| err(format!("{}: {e}", path.display())))?;
        for skipped in &outcome.skipped {
            tracing::warn!(file = %path.display(), row = skipped.row, "skipped row: {}", skipped.message);
        }
        records.extend(outcome.records);
    }
    let weekly = aggregate_weekly(&records, crop).map_err(|e| err(e.to_string()))?;
    let years = config.year_range.unwrap_or((i32::MIN, i32::MAX));
    build_price_series(crop, &weekly, years, config.gap_policy).map_err(|e| err(e.to_string()))
}

pub fn ingest_crop(config: &PipelineConfig, crop: &str) -> StageResult<PriceSeries> {
    let series = load_series(config, crop)?;
    write_artifact(Stage::Ingest, crop, &config.crop_dir(crop).join(SERIES_FILE), &write_series_csv(&series))?;
    Ok(series)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationarityArtifact {
    pub crop: String,
    pub max_lag: usize,
    #[serde(flatten)]
    pub report: StationarityReport,
}

pub fn eda_crop(config: &PipelineConfig, series: &PriceSeries) -> StageResult<StationarityArtifact> {
    let crop = series.crop();
    let max_lag = default_max_lag(series.len());
    let report =
        adf_stationarity(&series.values(), max_lag).map_err(|e| StageError::new(Stage::Eda, Some(crop), e))?;
    let artifact = StationarityArtifact {
        crop: crop.to_string(),
        max_lag,
        report,
    };
    write_artifact(Stage::Eda, crop, &config.crop_dir(crop).join(STATIONARITY_FILE), &to_json(&artifact))?;
    Ok(artifact)
}

/// The ARIMA and SARIMAX rows' orders, chosen on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderChoice {
    pub arima: Option<SelectedOrder>,
    pub sarimax: Option<SelectedOrder>,
}

fn choose(train: &PriceSeries, grid: &OrderGrid, config: &PipelineConfig) -> (Option<SelectedOrder>, SelectedOrder) {
    match select_order(train, grid, config.criterion) {
        Ok(sel) => (Some(sel), sel),
        Err(e) => {
            // keep the row; it shows up as a flagged failure
            tracing::warn!(crop = train.crop(), "order selection failed: {e}");
            let order = grid.candidates().into_iter().next().unwrap_or(SarimaxOrder::arima(0, 0, 0));
            let fallback = SelectedOrder {
                order,
                constant: grid.constant_for(&order),
                score: f64::NAN,
            };
            (None, fallback)
        }
    }
}

/// The ten-model catalog for one crop.
pub fn catalog_for(config: &PipelineConfig, series: &PriceSeries) -> StageResult<(Vec<ModelSpec>, OrderChoice)> {
    let (train, _) = train_test_split(series, config.test_fraction)
        .map_err(|e| StageError::new(Stage::Evaluate, Some(series.crop()), e))?;
    let arima_grid = OrderGrid {
        seasonal_p: vec![0],
        seasonal_d: vec![0],
        seasonal_q: vec![0],
        s: 0,
        ..config.arima_grid.clone()
    };
    let (arima, a) = choose(&train, &arima_grid, config);
    let (sarimax, s) = choose(&train, &config.sarimax_grid, config);
    let specs = model_catalog(
        config.seasonal_period,
        config.moving_average_window,
        (a.order, a.constant),
        (s.order, s.constant),
    );
    Ok((specs, OrderChoice { arima, sarimax }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChampionArtifact {
    pub crop: String,
    pub model: ModelSpec,
    pub label: String,
    pub mean_mape: Option<f64>,
    pub mean_rmse: Option<f64>,
    pub mean_rmsep: Option<f64>,
    pub orders: OrderChoice,
    /// The champion refit on the whole series.
    pub fitted: FittedModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationOutcome {
    pub leaderboard: Leaderboard,
    pub cv: Vec<CvReport>,
    pub champion: ChampionArtifact,
}

/// Leaderboard, cross-validation and champion for one crop, without
/// touching the filesystem.
pub fn evaluate_series(config: &PipelineConfig, series: &PriceSeries) -> StageResult<(EvaluationOutcome, Vec<Option<Forecast>>)> {
    let crop = series.crop();
    let err = |m: String| StageError::new(Stage::Evaluate, Some(crop), m);
    let (specs, orders) = catalog_for(config, series)?;
    let evaluation = evaluate_all_detailed(series, &specs, config.test_fraction).map_err(|e| err(e.to_string()))?;
    let cv = rolling_cross_validate(series, &specs, config.cv_folds).map_err(|e| err(e.to_string()))?;
    let model = select_champion(&cv).map_err(|e| err(e.to_string()))?;
    let fitted = fit(&model, series).map_err(|e| err(format!("refitting champion {}: {e}", model.label())))?;
    let report = cv.iter().find(|r| r.model == model).expect("champion comes from the reports");
    let champion = ChampionArtifact {
        crop: crop.to_string(),
        label: model.label(),
        mean_mape: report.mean_mape,
        mean_rmse: report.mean_rmse,
        mean_rmsep: report.mean_rmsep,
        model,
        orders,
        fitted,
    };
    Ok((
        EvaluationOutcome {
            leaderboard: evaluation.leaderboard,
            cv,
            champion,
        },
        evaluation.forecasts,
    ))
}

pub fn evaluate_crop(config: &PipelineConfig, series: &PriceSeries) -> StageResult<EvaluationOutcome> {
    let crop = series.crop();
    let (outcome, forecasts) = evaluate_series(config, series)?;
    let dir = config.crop_dir(crop);
    write_artifact(Stage::Evaluate, crop, &dir.join(LEADERBOARD_FILE), &to_json(&outcome.leaderboard))?;
    write_artifact(Stage::Evaluate, crop, &dir.join(CV_FILE), &to_json(&outcome.cv))?;
    write_artifact(Stage::Evaluate, crop, &dir.join(CHAMPION_FILE), &to_json(&outcome.champion))?;
    for (row, forecast) in outcome.leaderboard.rows.iter().zip(&forecasts) {
        let path = dir.join(PLOTS_DIR).join(format!("{}.csv", row.model.family()));
        write_artifact(Stage::Evaluate, crop, &path, &plot_data_csv(series, forecast.as_ref()))?;
    }
    Ok(outcome)
}

pub fn forecast_crop(
    config: &PipelineConfig,
    series: &PriceSeries,
    champion: &ChampionArtifact,
) -> StageResult<Forecast> {
    let crop = series.crop();
    let forecast =
        predict(&champion.fitted, config.horizon).map_err(|e| StageError::new(Stage::Forecast, Some(crop), e))?;
    let dir = config.crop_dir(crop);
    write_artifact(Stage::Forecast, crop, &dir.join(FORECAST_FILE), &to_json(&forecast))?;
    write_artifact(
        Stage::Forecast,
        crop,
        &dir.join(PLOTS_DIR).join("forecast.csv"),
        &plot_data_csv(series, Some(&forecast)),
    )?;
    Ok(forecast)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CropOutcome {
    pub crop: String,
    pub series: Option<PriceSeries>,
    pub stationarity: Option<StationarityArtifact>,
    pub evaluation: Option<EvaluationOutcome>,
    pub forecast: Option<Forecast>,
    pub errors: Vec<StageError>,
}

/// All stages for one crop. A failed stage is recorded and independent
/// later stages still run.
pub fn run_crop(config: &PipelineConfig, crop: &str) -> CropOutcome {
    let mut out = CropOutcome {
        crop: crop.to_string(),
        series: None,
        stationarity: None,
        evaluation: None,
        forecast: None,
        errors: Vec::new(),
    };
    let series = match ingest_crop(config, crop) {
        Ok(s) => s,
        Err(e) => {
            out.errors.push(e);
            return out;
        }
    };
    match eda_crop(config, &series) {
        Ok(r) => out.stationarity = Some(r),
        Err(e) => out.errors.push(e),
    }
    match evaluate_crop(config, &series) {
        Ok(ev) => {
            match forecast_crop(config, &series, &ev.champion) {
                Ok(f) => out.forecast = Some(f),
                Err(e) => out.errors.push(e),
            }
            out.evaluation = Some(ev);
        }
        Err(e) => out.errors.push(e),
    }
    out.series = Some(series);
    out
}

pub fn read_scenario(path: &Path) -> StageResult<ScenarioFile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| StageError::new(Stage::Optimize, None, format!("{}: {e}", path.display())))?;
    ScenarioFile::from_json(&text).map_err(|e| StageError::new(Stage::Optimize, None, format!("{}: {e}", path.display())))
}

/// Solves `scenario`, pricing crops without a stated price from
/// `forecasts`, and writes the solution next to the crop directories.
pub fn optimize(
    config: &PipelineConfig,
    scenario: &ScenarioFile,
    forecasts: &[(&str, &Forecast)],
) -> StageResult<PortfolioSolution> {
    let price = |name: &str| {
        forecasts
            .iter()
            .find(|(c, _)| *c == name)
            .or_else(|| forecasts.iter().find(|(c, _)| c.eq_ignore_ascii_case(name)))
            .and_then(|(_, f)| config.price_aggregation.apply(f))
    };
    let farm = scenario
        .resolve(price)
        .map_err(|e| StageError::new(Stage::Optimize, None, e))?;
    let solution = solve_portfolio(&farm).map_err(|e| StageError::new(Stage::Optimize, None, e))?;
    write_artifact(Stage::Optimize, "portfolio", &config.output_dir.join(SOLUTION_FILE), &to_json(&solution))?;
    Ok(solution)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub crops: Vec<CropOutcome>,
    pub solution: Option<PortfolioSolution>,
    pub errors: Vec<StageError>,
}

impl RunReport {
    pub fn success(&self) -> bool {
        self.errors.is_empty()
    }

    pub fn summary(&self) -> String {
        if self.errors.is_empty() {
            return format!("pipeline finished for {} crop(s)", self.crops.len());
        }
        let mut lines = vec![format!("pipeline finished with {} error(s):", self.errors.len())];
        lines.extend(self.errors.iter().map(|e| format!("  {e}")));
        lines.join("\n")
    }
}

/// Runs every crop concurrently, then the portfolio stage if configured.
pub fn run_pipeline(config: &PipelineConfig) -> RunReport {
    if let Err(e) = config.validate() {
        return RunReport {
            crops: Vec::new(),
            solution: None,
            errors: vec![StageError::new(Stage::Ingest, None, e)],
        };
    }
    let crops: Vec<CropOutcome> = config.crops.par_iter().map(|c| run_crop(config, c)).collect();
    let mut errors: Vec<StageError> = crops.iter().flat_map(|c| c.errors.iter().cloned()).collect();
    let mut solution = None;
    if let Some(path) = &config.scenario {
        let forecasts: Vec<(&str, &Forecast)> = crops
            .iter()
            .filter_map(|c| Some((c.crop.as_str(), c.forecast.as_ref()?)))
            .collect();
        match read_scenario(path).and_then(|s| optimize(config, &s, &forecasts)) {
            Ok(s) => solution = Some(s),
            Err(e) => errors.push(e),
        }
    }
    RunReport { crops, solution, errors }
}
