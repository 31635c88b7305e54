//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use agriplan_core::portfolio::{Constraint, LinearProgram, LpStatus};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Optimal value and the set of optimal vertices, found by enumerating every
/// basic solution of `Ax <= b, x >= 0, Σx <= bound`.
pub struct VertexOptimum {
    pub status: LpStatus,
    pub objective: f64,
    pub vertices: Vec<Vec<f64>>,
}

/// Solves `m x = rhs` by Gaussian elimination with partial pivoting.
fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[piv][col].abs() < 1e-10 {
            return None;
        }
        m.swap(col, piv);
        rhs.swap(col, piv);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
            rhs[r] -= f * rhs[col];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (rhs[r] - s) / m[r][r];
    }
    Some(x)
}

fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

fn best_vertex(lp: &LinearProgram, bound: f64) -> Option<(f64, Vec<Vec<f64>>)> {
    let n = lp.objective.len();
    let mut rows: Vec<(Vec<f64>, f64)> = lp
        .constraints
        .iter()
        .map(|c| (c.coefficients.clone(), c.rhs))
        .collect();
    for j in 0..n {
        let mut a = vec![0.0; n];
        a[j] = -1.0;
        rows.push((a, 0.0));
    }
    rows.push((vec![1.0; n], bound));

    let mut best: Option<(f64, Vec<Vec<f64>>)> = None;
    for idx in subsets(rows.len(), n) {
        let m = idx.iter().map(|&i| rows[i].0.clone()).collect();
        let rhs = idx.iter().map(|&i| rows[i].1).collect();
        let Some(x) = solve_square(m, rhs) else { continue };
        let feasible = rows.iter().all(|(a, b)| {
            let lhs: f64 = a.iter().zip(&x).map(|(a, x)| a * x).sum();
            lhs <= b + 1e-7 * (1.0 + b.abs())
        });
        if !feasible {
            continue;
        }
        let value: f64 = lp.objective.iter().zip(&x).map(|(c, x)| c * x).sum();
        let tol = 1e-7 * (1.0 + value.abs());
        best = match best {
            None => Some((value, vec![x])),
            Some((v, mut xs)) if (value - v).abs() <= tol => {
                if !xs.iter().any(|y| y.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-7)) {
                    xs.push(x);
                }
                Some((v.max(value), xs))
            }
            Some((v, _)) if value > v => Some((value, vec![x])),
            keep => keep,
        };
    }
    best
}

/// Vertex enumeration with an artificial box; the LP is unbounded when
/// doubling the box changes the optimum.
pub fn vertex_oracle(lp: &LinearProgram) -> VertexOptimum {
    const BOX: f64 = 1e6;
    match (best_vertex(lp, BOX), best_vertex(lp, 2.0 * BOX)) {
        (None, _) | (_, None) => VertexOptimum {
            status: LpStatus::Infeasible,
            objective: 0.0,
            vertices: Vec::new(),
        },
        (Some((a, xs)), Some((b, _))) => {
            if (b - a).abs() > 1e-6 * (1.0 + a.abs()) {
                VertexOptimum {
                    status: LpStatus::Unbounded,
                    objective: f64::INFINITY,
                    vertices: Vec::new(),
                }
            } else {
                VertexOptimum {
                    status: LpStatus::Optimal,
                    objective: a,
                    vertices: xs,
                }
            }
        }
    }
}

/// Random LP with 1..=4 variables and 1..=5 rows. Coefficients sit on a
/// half-integer lattice so degenerate vertices and ties come up often; about
/// one row in eight has a negative right-hand side.
pub fn random_lp(rng: &mut ChaCha8Rng) -> LinearProgram {
    let n = rng.random_range(1..=4);
    let m = rng.random_range(1..=5);
    let half = |rng: &mut ChaCha8Rng, lo: i32, hi: i32| rng.random_range(lo..=hi) as f64 / 2.0;
    LinearProgram {
        variables: (0..n).map(|j| format!("x{j}")).collect(),
        objective: (0..n).map(|_| half(rng, -6, 12)).collect(),
        constraints: (0..m)
            .map(|i| {
                let negative = rng.random_bool(0.125);
                Constraint {
                    name: format!("r{i}"),
                    coefficients: (0..n).map(|_| half(rng, -3, 10)).collect(),
                    rhs: if negative { -half(rng, 1, 10) } else { half(rng, 0, 40) },
                }
            })
            .collect(),
    }
}

pub fn random_lps(seed: u64, count: usize) -> Vec<LinearProgram> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_lp(&mut rng)).collect()
}

/// Mismatch description, or `None` when the solver agrees with the oracle.
pub fn compare_with_oracle(lp: &LinearProgram) -> Option<String> {
    let got = match agriplan_core::portfolio::solve_lp(lp) {
        Ok(s) => s,
        Err(e) => return Some(format!("solver error: {e}")),
    };
    let want = vertex_oracle(lp);
    if got.status != want.status {
        return Some(format!("status {:?} vs oracle {:?}", got.status, want.status));
    }
    if want.status != LpStatus::Optimal {
        return None;
    }
    if (got.objective - want.objective).abs() > 1e-6 {
        return Some(format!("objective {} vs oracle {}", got.objective, want.objective));
    }
    let matches_vertex = want
        .vertices
        .iter()
        .any(|v| v.iter().zip(&got.values).all(|(a, b)| (a - b).abs() <= 1e-6));
    // with several optimal vertices any optimal feasible point is acceptable
    let feasible = lp.constraints.iter().all(|c| {
        let lhs: f64 = c.coefficients.iter().zip(&got.values).map(|(a, x)| a * x).sum();
        lhs <= c.rhs + 1e-6 + 1e-9 * c.rhs.abs()
    }) && got.values.iter().all(|x| *x >= -1e-9);
    if !(matches_vertex || (want.vertices.len() > 1 && feasible)) {
        return Some(format!("allocation {:?} not among oracle vertices {:?}", got.values, want.vertices));
    }
    None
}

use agriplan_core::forecast::{fit, predict, InitialState, ModelSpec, SarimaxOrder};
use agriplan_core::PriceSeries;

/// Positive random-walk series with a mild seasonal wobble.
pub fn random_series(seed: u64, n: usize) -> PriceSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut level: f64 = rng.random_range(10.0..60.0);
    let values: Vec<f64> = (0..n)
        .map(|t| {
            level = (level + rng.random_range(-1.5..1.5)).max(1.0);
            level + (t as f64 * 0.5).sin()
        })
        .collect();
    let start = chrono::NaiveDate::from_ymd_opt(2012, 1, 2).unwrap();
    PriceSeries::from_values("Test", start, &values).unwrap()
}

fn forecast_of(spec: &ModelSpec, series: &PriceSeries, h: usize) -> Vec<f64> {
    let model = fit(spec, series).unwrap_or_else(|e| panic!("{}: {e}", spec.label()));
    predict(&model, h).unwrap().values()
}

fn max_gap(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest forecast discrepancy for each reduction identity on one series,
/// with randomly drawn smoothing parameters and starting state.
pub fn reduction_gaps(seed: u64) -> Vec<(&'static str, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let series = random_series(seed, rng.random_range(30..90));
    let h = 12;
    let m = 4;
    let alpha = rng.random_range(0.05..0.95);
    let beta = rng.random_range(0.05..0.95);
    let level = series.values()[0] + rng.random_range(-2.0..2.0);
    let trend = rng.random_range(-1.0..1.0);
    let naive = forecast_of(&ModelSpec::Naive, &series, h);

    let ses_one = ModelSpec::Ses {
        alpha: Some(1.0),
        init: Some(InitialState { level, trend: 0.0, seasonals: Vec::new() }),
    };
    let ses = ModelSpec::Ses {
        alpha: Some(alpha),
        init: Some(InitialState { level, trend: 0.0, seasonals: Vec::new() }),
    };
    let holt_flat = ModelSpec::Holt {
        alpha: Some(alpha),
        beta: Some(0.0),
        init: Some(InitialState { level, trend: 0.0, seasonals: Vec::new() }),
    };
    let holt = ModelSpec::Holt {
        alpha: Some(alpha),
        beta: Some(beta),
        init: Some(InitialState { level, trend, seasonals: Vec::new() }),
    };
    let hw_flat = ModelSpec::HoltWintersAdditive {
        alpha: Some(alpha),
        beta: Some(beta),
        gamma: Some(0.0),
        seasonal_period: m,
        init: Some(InitialState { level, trend, seasonals: vec![0.0; m] }),
    };
    let random_walk = ModelSpec::Arima {
        order: SarimaxOrder::arima(0, 1, 0),
        constant: false,
    };
    vec![
        ("ses(alpha=1) = naive", max_gap(&forecast_of(&ses_one, &series, h), &naive)),
        (
            "moving_average(1) = naive",
            max_gap(&forecast_of(&ModelSpec::MovingAverage { window: 1 }, &series, h), &naive),
        ),
        (
            "holt(beta=0) = ses",
            max_gap(&forecast_of(&holt_flat, &series, h), &forecast_of(&ses, &series, h)),
        ),
        (
            "holt_winters_additive(gamma=0) = holt",
            max_gap(&forecast_of(&hw_flat, &series, h), &forecast_of(&holt, &series, h)),
        ),
        ("arima(0,1,0) = naive", max_gap(&forecast_of(&random_walk, &series, h), &naive)),
    ]
}
