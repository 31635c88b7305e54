//! Acceptance checks: one PASS/FAIL line per criterion, nonzero exit on any failure.

#[path = "../../core/tests/common/mod.rs"]
mod oracle;
mod common;

use std::time::{Duration, Instant};

use agriplan_cli::pipeline::{evaluate_series, load_series};
use agriplan_cli::{run_pipeline, PipelineConfig};
use agriplan_core::evaluate::{evaluate_all, mape, rmse, rmsep};
use agriplan_core::forecast::{fit_sarimax, select_order, Criterion, ModelSpec, ModelState, OrderGrid, SarimaxOrder};
use agriplan_core::portfolio::{build_lp, solve_portfolio, LpStatus};
use agriplan_core::portfolio::ScenarioFile;
use agriplan_core::series::{rolling_cv_splits, train_test_split};
use agriplan_core::{synthetic, PriceSeries};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn farm_scenario() -> agriplan_core::FarmScenario {
    ScenarioFile::from_json(common::FARM_SCENARIO)
        .unwrap()
        .resolve(|_| None)
        .unwrap()
}

fn lp_reproduction() -> Check {
    let scenario = farm_scenario();
    let start = Instant::now();
    let solution = solve_portfolio(&scenario).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let expected = [("Rice", 0.0), ("Maize", 7.1918), ("Jowar", 12.1233), ("Urad", 0.6849)];
    for (crop, acres) in expected {
        let got = solution.acres[crop];
        ensure((got - acres).abs() <= 0.005, format!("{crop} = {got:.4}, expected {acres}"))?;
    }
    ensure(
        (solution.objective_inr - 347_383.0).abs() <= 50.0,
        format!("objective {:.2}", solution.objective_inr),
    )?;
    ensure(elapsed < Duration::from_millis(10), format!("took {elapsed:?}"))?;
    Ok(format!("objective {:.2} in {elapsed:?}", solution.objective_inr))
}

fn constraints_binding() -> Check {
    let scenario = farm_scenario();
    let solution = solve_portfolio(&scenario).map_err(|e| e.to_string())?;
    let lp = build_lp(&scenario);
    let x: Vec<f64> = lp.variables.iter().map(|v| solution.acres[v.as_str()]).collect();
    let mut slacks = Vec::new();
    for row in &lp.constraints {
        let used: f64 = row.coefficients.iter().zip(&x).map(|(a, x)| a * x).sum();
        let rel = (row.rhs - used) / row.rhs;
        ensure(rel.abs() < 1e-6, format!("{} relative slack {rel:e}", row.name))?;
        slacks.push(format!("{} {rel:.1e}", row.name));
    }
    ensure(lp.constraints.len() == 3, "expected three rows")?;
    Ok(slacks.join(", "))
}

fn simplex_vs_oracle() -> Check {
    let lps = oracle::random_lps(2024, 300);
    let start = Instant::now();
    let mut statuses = [0usize; 3];
    for (i, lp) in lps.iter().enumerate() {
        if let Some(msg) = oracle::compare_with_oracle(lp) {
            return Err(format!("LP {i}: {msg}"));
        }
        let status = oracle::vertex_oracle(lp).status;
        statuses[match status {
            LpStatus::Optimal => 0,
            LpStatus::Infeasible => 1,
            LpStatus::Unbounded => 2,
        }] += 1;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(5), format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} LPs ({} optimal, {} infeasible, {} unbounded) in {elapsed:?}",
        lps.len(),
        statuses[0],
        statuses[1],
        statuses[2]
    ))
}

fn leaderboard_properties() -> Check {
    let config = PipelineConfig {
        synthetic: true,
        ..PipelineConfig::default()
    };
    let series = load_series(&config, "Rice").map_err(|e| e.to_string())?;
    ensure(series.len() == 260, format!("series has {} points", series.len()))?;
    let start = Instant::now();
    let (outcome, _) = evaluate_series(&config, &series).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let rows = &outcome.leaderboard.rows;
    ensure(rows.len() == 10, format!("{} leaderboard rows", rows.len()))?;
    for r in rows {
        ensure(
            r.rmse.is_some() && r.rmsep.is_some() && r.mape.is_some(),
            format!("{} is missing metrics", r.label),
        )?;
    }
    ensure(outcome.cv.len() == 10, format!("{} CV reports", outcome.cv.len()))?;
    for r in &outcome.cv {
        ensure(r.per_fold.len() == 4, format!("{} has {} folds", r.label, r.per_fold.len()))?;
    }
    let ratios: Vec<f64> = rows
        .iter()
        .filter(|r| r.rmse.is_some_and(|e| e > 0.0))
        .map(|r| r.rmsep.unwrap() / r.rmse.unwrap())
        .collect();
    let spread = ratios.iter().map(|r| (r - ratios[0]).abs()).fold(0.0, f64::max);
    ensure(spread <= 1e-9 * ratios[0], format!("RMSEP/RMSE ratios spread by {spread:e}"))?;
    ensure(elapsed < Duration::from_secs(60), format!("took {elapsed:?}"))?;
    Ok(format!(
        "10 rows share ratio {:.6}, 4-fold CV, champion {} in {elapsed:.1?}",
        ratios[0], outcome.champion.label
    ))
}

fn reduction_suite() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..20 {
        for (name, gap) in oracle::reduction_gaps(seed) {
            ensure(gap <= 1e-9, format!("seed {seed}: {name} differs by {gap:e}"))?;
            worst = worst.max(gap);
        }
    }
    Ok(format!("5 identities on 20 series, max gap {worst:e}"))
}

fn sarimax_recovery() -> Check {
    let values: Vec<f64> = synthetic::ar1(0.7, 500, 1.0, 7).iter().map(|v| v + 50.0).collect();
    let ar = PriceSeries::from_values("AR", synthetic::default_start(), &values).map_err(|e| e.to_string())?;
    let fitted = fit_sarimax(SarimaxOrder::arima(1, 0, 0), true, &ar, None).map_err(|e| e.to_string())?;
    let ModelState::Sarimax(state) = &fitted.state else {
        return Err("not a SARIMAX state".into());
    };
    let phi = state.ar[0];
    ensure((phi - 0.7).abs() <= 0.1, format!("phi = {phi}"))?;

    let values = synthetic::SeasonalTrend {
        level: 50.0,
        slope: 0.0,
        amplitude: 6.0,
        period: 12,
        noise_sd: 0.8,
        persistence: 0.3,
    }
    .values(240, 3);
    let series = PriceSeries::from_values("Seasonal", synthetic::default_start(), &values).map_err(|e| e.to_string())?;
    let (train, _) = train_test_split(&series, 0.2).map_err(|e| e.to_string())?;
    let grid = OrderGrid {
        seasonal_p: vec![0, 1],
        seasonal_d: vec![0, 1],
        seasonal_q: vec![0, 1],
        s: 12,
        ..OrderGrid::nonseasonal(vec![0, 1], vec![0], vec![0])
    };
    let chosen = select_order(&train, &grid, Criterion::Aic).map_err(|e| e.to_string())?;
    let o = chosen.order;
    ensure(o.seasonal_p + o.seasonal_d + o.seasonal_q >= 1, format!("picked {o}"))?;
    let spec = ModelSpec::Sarimax {
        order: o,
        constant: chosen.constant,
    };
    let board = evaluate_all(&series, &[spec, ModelSpec::Naive], 0.2).map_err(|e| e.to_string())?;
    let (s, n) = (board.rows[0].mape, board.rows[1].mape);
    let (Some(s), Some(n)) = (s, n) else {
        return Err("missing MAPE".into());
    };
    ensure(s < n, format!("SARIMAX MAPE {s:.3} vs naive {n:.3}"))?;
    Ok(format!("phi {phi:.4}; picked {o}, MAPE {s:.3} vs naive {n:.3}"))
}

fn metric_values() -> Check {
    let r = rmse(&[3.0, 4.0], &[0.0, 0.0]).map_err(|e| e.to_string())?;
    let m = mape(&[100.0, 200.0], &[90.0, 220.0]).map_err(|e| e.to_string())?;
    let p = rmsep(&[10.0, 10.0], &[11.0, 12.0]).map_err(|e| e.to_string())?;
    ensure((r - 3.535534).abs() <= 1e-6, format!("rmse {r}"))?;
    ensure((m - 10.0).abs() <= 1e-9, format!("mape {m}"))?;
    ensure((p - 15.81139).abs() <= 1e-4, format!("rmsep {p}"))?;
    Ok(format!("rmse {r:.6}, mape {m}, rmsep {p:.5}"))
}

fn cv_partition() -> Check {
    let splits = rolling_cv_splits(100, 4).map_err(|e| e.to_string())?;
    let got: Vec<(usize, usize)> = splits.iter().map(|s| (s.train_end, s.test_end)).collect();
    ensure(got == [(20, 40), (40, 60), (60, 80), (80, 100)], format!("{got:?}"))?;
    let covered: Vec<usize> = splits.iter().flat_map(|s| s.test()).collect();
    ensure(covered == (20..100).collect::<Vec<_>>(), "test windows do not tile [20, 100)")?;
    Ok(format!("{got:?}"))
}

fn determinism() -> Check {
    let root = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scenario = root.path().join("scenario.json");
    std::fs::write(&scenario, common::FARM_SCENARIO).map_err(|e| e.to_string())?;
    let mut snapshots = Vec::new();
    let start = Instant::now();
    for run in ["a", "b"] {
        let config = PipelineConfig {
            synthetic: true,
            output_dir: root.path().join(run),
            scenario: Some(scenario.clone()),
            ..PipelineConfig::default()
        };
        let report = run_pipeline(&config);
        ensure(report.success(), report.summary())?;
        snapshots.push(common::snapshot(&config.output_dir));
    }
    let (a, b) = (&snapshots[0], &snapshots[1]);
    ensure(!a.is_empty(), "no artifacts written")?;
    ensure(a.len() == b.len(), format!("{} vs {} files", a.len(), b.len()))?;
    for ((pa, da), (pb, db)) in a.iter().zip(b) {
        ensure(pa == pb && da == db, format!("{pa} differs"))?;
    }
    Ok(format!("{} files identical across two runs in {:.1?}", a.len(), start.elapsed()))
}

fn main() {
    let checks: [(&str, fn() -> Check); 9] = [
        ("LP reproduction of the farm scenario", lp_reproduction),
        ("budget, storage and land all binding", constraints_binding),
        ("simplex matches vertex enumeration", simplex_vs_oracle),
        ("leaderboard ratio and end-to-end tables", leaderboard_properties),
        ("model reduction identities", reduction_suite),
        ("SARIMAX recovery", sarimax_recovery),
        ("metric unit values", metric_values),
        ("rolling CV partition", cv_partition),
        ("pipeline determinism", determinism),
    ];
    let mut failed = 0;
    for (name, check) in checks {
        match std::panic::catch_unwind(check) {
            Ok(Ok(detail)) => println!("PASS  {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL  {name}: panicked");
            }
        }
    }
    println!("{} of {} criteria passed", checks.len() - failed, checks.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
