#![allow(dead_code)]

use std::path::Path;

use agriplan_cli::PipelineConfig;
use agriplan_core::forecast::OrderGrid;

/// Small seasonal period and grids so whole runs take a second or two.
pub fn fast_config(output_dir: &Path) -> PipelineConfig {
    PipelineConfig {
        output_dir: output_dir.to_owned(),
        synthetic: true,
        synthetic_length: 120,
        seasonal_period: 12,
        horizon: 12,
        arima_grid: OrderGrid::nonseasonal(vec![0, 1], vec![1], vec![0]),
        sarimax_grid: OrderGrid {
            seasonal_d: vec![1],
            s: 12,
            ..OrderGrid::nonseasonal(vec![0, 1], vec![0], vec![0])
        },
        ..PipelineConfig::default()
    }
}

pub const FARM_SCENARIO: &str = r#"{
  "total_land_acres": 20,
  "budget_inr": 200000,
  "storage_kg": 40000,
  "crops": [
    {"name": "Rice", "cost_per_acre_inr": 22500, "yield_kg_per_acre": 3000, "net_profit_per_kg_inr": 4.5},
    {"name": "Maize", "cost_per_acre_inr": 15000, "yield_kg_per_acre": 3000, "net_profit_per_kg_inr": 7},
    {"name": "Jowar", "cost_per_acre_inr": 7000, "yield_kg_per_acre": 1500, "net_profit_per_kg_inr": 10.34},
    {"name": "Urad", "cost_per_acre_inr": 10600, "yield_kg_per_acre": 350, "net_profit_per_kg_inr": 34.72}
  ]
}"#;

/// Relative path -> contents for every file under `root`.
pub fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(dir: &Path, root: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        let mut entries: Vec<_> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
        entries.sort();
        for p in entries {
            if p.is_dir() {
                walk(&p, root, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
                out.push((rel, std::fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out
}
