use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use agriplan_cli::config::{PipelineConfig, OUTPUT_DIR_ENV};
use agriplan_cli::pipeline::{self, StageError};
use agriplan_cli::service::{self, AppState};
use agriplan_core::evaluate::{cv_csv, leaderboard_csv};
use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "agriplan", version, about = "Weekly crop price forecasting and acreage planning")]
struct Cli {
    /// Pipeline config (JSON). Flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    #[arg(long, global = true, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    /// Comma-separated crop names.
    #[arg(long, global = true, value_delimiter = ',')]
    crops: Option<Vec<String>>,
    /// Generate seeded series instead of reading data_dir.
    #[arg(long, global = true)]
    synthetic: bool,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    horizon: Option<usize>,
    #[arg(long, global = true)]
    cv_folds: Option<usize>,
    #[arg(long, global = true)]
    test_fraction: Option<f64>,
    #[arg(long, global = true)]
    seasonal_period: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build weekly series files from raw exports or synthetic data.
    Ingest,
    /// Stationarity report for one crop.
    Eda {
        #[arg(long)]
        crop: String,
    },
    /// Leaderboard and cross-validation tables for one crop.
    Evaluate {
        #[arg(long)]
        crop: String,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Champion forecast for one crop.
    Forecast {
        #[arg(long)]
        crop: String,
    },
    /// Solve a portfolio scenario; missing prices come from champion forecasts.
    Optimize {
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Every stage for every crop, then the scenario if configured.
    Run {
        #[arg(long)]
        scenario: Option<PathBuf>,
    },
    /// Serve the JSON API.
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: String,
    },
}

fn resolve_config(cli: &Cli) -> anyhow::Result<PipelineConfig> {
    let mut c = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(v) = &cli.data_dir {
        c.data_dir = v.clone();
    }
    if let Some(v) = &cli.output_dir {
        c.output_dir = v.clone();
    }
    if let Some(v) = &cli.crops {
        c.crops = v.clone();
    }
    if cli.synthetic {
        c.synthetic = true;
    }
    if let Some(v) = cli.seed {
        c.seed = v;
    }
    if let Some(v) = cli.horizon {
        c.horizon = v;
    }
    if let Some(v) = cli.cv_folds {
        c.cv_folds = v;
    }
    if let Some(v) = cli.test_fraction {
        c.test_fraction = v;
    }
    if let Some(v) = cli.seasonal_period {
        c.seasonal_period = v;
    }
    if let Command::Run { scenario: Some(s) } = &cli.command {
        c.scenario = Some(s.clone());
    }
    Ok(c)
}

fn print_json<T: serde::Serialize>(value: &T) {
    print!("{}", pipeline::to_json(value));
}

fn stage<T>(r: Result<T, StageError>) -> anyhow::Result<T> {
    r.map_err(|e| anyhow::anyhow!("{e}"))
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    let config = resolve_config(&cli)?;
    config.validate()?;
    match cli.command {
        Command::Ingest => {
            let mut failed = false;
            for crop in &config.crops {
                match pipeline::ingest_crop(&config, crop) {
                    Ok(s) => println!("{crop}: {} weeks, {} to {}", s.len(), s.first_date(), s.last_date()),
                    Err(e) => {
                        eprintln!("{e}");
                        failed = true;
                    }
                }
            }
            return Ok(if failed { ExitCode::FAILURE } else { ExitCode::SUCCESS });
        }
        Command::Eda { crop } => {
            let series = stage(pipeline::ingest_crop(&config, &crop))?;
            print_json(&stage(pipeline::eda_crop(&config, &series))?);
        }
        Command::Evaluate { crop, format } => {
            let series = stage(pipeline::ingest_crop(&config, &crop))?;
            let ev = stage(pipeline::evaluate_crop(&config, &series))?;
            match format {
                Format::Json => print_json(&serde_json::json!({
                    "leaderboard": ev.leaderboard,
                    "cv": ev.cv,
                    "champion": ev.champion.label,
                })),
                Format::Csv => print!("{}\n{}", leaderboard_csv(&ev.leaderboard), cv_csv(&ev.cv)),
            }
        }
        Command::Forecast { crop } => {
            let series = stage(pipeline::ingest_crop(&config, &crop))?;
            let ev = stage(pipeline::evaluate_crop(&config, &series))?;
            print_json(&stage(pipeline::forecast_crop(&config, &series, &ev.champion))?);
        }
        Command::Optimize { scenario } => {
            let file = stage(pipeline::read_scenario(&scenario))?;
            let needed: Vec<String> = file.missing_prices().into_iter().map(str::to_string).collect();
            let outcomes: Vec<_> = needed.iter().map(|c| pipeline::run_crop(&config, c)).collect();
            for e in outcomes.iter().flat_map(|o| &o.errors) {
                eprintln!("{e}");
            }
            let forecasts: Vec<_> = outcomes
                .iter()
                .filter_map(|o| Some((o.crop.as_str(), o.forecast.as_ref()?)))
                .collect();
            print_json(&stage(pipeline::optimize(&config, &file, &forecasts))?);
        }
        Command::Run { .. } => {
            let report = pipeline::run_pipeline(&config);
            if report.success() {
                println!("{}", report.summary());
                return Ok(ExitCode::SUCCESS);
            }
            eprintln!("{}", report.summary());
            return Ok(ExitCode::FAILURE);
        }
        Command::Serve { bind } => {
            let state = Arc::new(AppState::build(&config));
            let app = service::router(state);
            let runtime = tokio::runtime::Runtime::new().context("starting async runtime")?;
            runtime.block_on(async move {
                let listener = tokio::net::TcpListener::bind(&bind)
                    .await
                    .with_context(|| format!("binding {bind}"))?;
                tracing::info!("listening on {bind}");
                axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await
                    .context("serving")
            })?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
