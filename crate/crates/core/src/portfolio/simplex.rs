//! Dense two-phase primal simplex with Bland's anti-cycling rule.

use serde::{Deserialize, Serialize};

use super::PortfolioError;

/// Reduced-cost tolerance.
const COST_TOL: f64 = 1e-9;
/// Smallest pivot element accepted.
const PIVOT_TOL: f64 = 1e-11;

/// `a · x <= rhs`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub name: String,
    pub coefficients: Vec<f64>,
    pub rhs: f64,
}

/// Maximize `objective · x` subject to `constraints` and `x >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub variables: Vec<String>,
    pub objective: Vec<f64>,
    pub constraints: Vec<Constraint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable values at the final vertex (zeros unless optimal).
    pub values: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
}

impl LinearProgram {
    pub fn check_dimensions(&self) -> Result<(), PortfolioError> {
        let n = self.objective.len();
        if self.variables.len() != n {
            return Err(PortfolioError::Dimension(format!(
                "{} variable names for {n} objective coefficients",
                self.variables.len()
            )));
        }
        for c in &self.constraints {
            if c.coefficients.len() != n {
                return Err(PortfolioError::Dimension(format!(
                    "constraint `{}` has {} coefficients, expected {n}",
                    c.name,
                    c.coefficients.len()
                )));
            }
        }
        let finite = self.objective.iter().all(|v| v.is_finite())
            && self
                .constraints
                .iter()
                .all(|c| c.rhs.is_finite() && c.coefficients.iter().all(|v| v.is_finite()));
        if !finite {
            return Err(PortfolioError::Dimension("non-finite coefficient".into()));
        }
        Ok(())
    }
}

struct Tableau {
    /// `rows x (cols + 1)`; the last column is the right-hand side.
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let mut d = costs.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = costs[b];
            if cb != 0.0 {
                for (dj, a) in d.iter_mut().zip(&self.rows[i]) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    /// Maximizes `costs · x` from the current basis. Returns `false` when
    /// the objective is unbounded.
    fn optimize(
        &mut self,
        costs: &[f64],
        allowed: &[bool],
        iterations: &mut usize,
        cap: usize,
    ) -> Result<bool, PortfolioError> {
        loop {
            let d = self.reduced_costs(costs);
            // Bland: lowest-index improving column
            let Some(enter) = (0..self.cols).find(|&j| allowed[j] && d[j] > COST_TOL) else {
                return Ok(true);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][enter];
                if a <= PIVOT_TOL {
                    continue;
                }
                let ratio = self.rhs(i).max(0.0) / a;
                leave = match leave {
                    None => Some((i, ratio)),
                    Some((j, best)) => {
                        let tie = (ratio - best).abs() <= 1e-12 * (1.0 + best.abs());
                        if (!tie && ratio < best) || (tie && self.basis[i] < self.basis[j]) {
                            Some((i, ratio))
                        } else {
                            Some((j, best))
                        }
                    }
                };
            }
            let Some((row, _)) = leave else {
                return Ok(false);
            };
            *iterations += 1;
            if *iterations > cap {
                return Err(PortfolioError::SolverFailure { iterations: *iterations });
            }
            self.pivot(row, enter);
        }
    }
}

/// Solves a maximization LP with `<=` rows and nonnegative variables.
///
/// Rows with a negative right-hand side are handled by a phase-one search
/// for a feasible basis. The vertex reached under Bland's rule is reported;
/// alternative optima are not enumerated.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, PortfolioError> {
    lp.check_dimensions()?;
    let n = lp.objective.len();
    let m = lp.constraints.len();
    let artificial_rows: Vec<usize> = (0..m).filter(|&i| lp.constraints[i].rhs < 0.0).collect();
    let cols = n + m + artificial_rows.len();

    let mut rows = vec![vec![0.0; cols + 1]; m];
    let mut basis = vec![0; m];
    for (i, c) in lp.constraints.iter().enumerate() {
        let sign = if c.rhs < 0.0 { -1.0 } else { 1.0 };
        for (j, a) in c.coefficients.iter().enumerate() {
            rows[i][j] = sign * a;
        }
        rows[i][n + i] = sign;
        rows[i][cols] = sign * c.rhs;
        basis[i] = n + i;
    }
    for (k, &i) in artificial_rows.iter().enumerate() {
        rows[i][n + m + k] = 1.0;
        basis[i] = n + m + k;
    }
    let mut tab = Tableau { rows, basis, cols };
    let cap = 10 * (m + cols);
    let mut iterations = 0;
    let is_artificial = |j: usize| j >= n + m;

    if !artificial_rows.is_empty() {
        let phase_one: Vec<f64> = (0..cols).map(|j| if is_artificial(j) { -1.0 } else { 0.0 }).collect();
        let everything = vec![true; cols];
        tab.optimize(&phase_one, &everything, &mut iterations, cap)?;
        let infeasibility: f64 = (0..m)
            .filter(|&i| is_artificial(tab.basis[i]))
            .map(|i| tab.rhs(i))
            .sum();
        let scale = 1.0 + lp.constraints.iter().map(|c| c.rhs.abs()).fold(0.0, f64::max);
        if infeasibility > 1e-9 * scale {
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                values: vec![0.0; n],
                objective: 0.0,
                iterations,
            });
        }
        // drive zero-level artificials out of the basis where possible
        for i in 0..m {
            if is_artificial(tab.basis[i]) {
                if let Some(j) = (0..n + m).find(|&j| tab.rows[i][j].abs() > PIVOT_TOL) {
                    tab.pivot(i, j);
                }
            }
        }
    }

    let mut costs = vec![0.0; cols];
    costs[..n].copy_from_slice(&lp.objective);
    let allowed: Vec<bool> = (0..cols).map(|j| !is_artificial(j)).collect();
    let bounded = tab.optimize(&costs, &allowed, &mut iterations, cap)?;
    if !bounded {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            values: vec![0.0; n],
            objective: f64::INFINITY,
            iterations,
        });
    }

    let mut values = vec![0.0; n];
    for (i, &b) in tab.basis.iter().enumerate() {
        if b < n {
            values[b] = tab.rhs(i).max(0.0);
        }
    }
    let objective = values.iter().zip(&lp.objective).map(|(x, c)| x * c).sum();
    Ok(LpSolution {
        status: LpStatus::Optimal,
        values,
        objective,
        iterations,
    })
}
