use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sarimax::fit_conditioned;
use super::{ForecastError, SarimaxOrder};
use crate::ingest::PriceSeries;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    #[default]
    Aic,
    Bic,
}

/// `(aic, bic)` for a log-likelihood with `k` parameters and `n` observations.
pub fn information_criteria(log_likelihood: f64, k: usize, n: f64) -> (f64, f64) {
    let k = k as f64;
    (
        2.0 * k - 2.0 * log_likelihood,
        k * n.ln() - 2.0 * log_likelihood,
    )
}

/// Candidate values for each order component, with a fixed seasonal period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OrderGrid {
    pub p: Vec<usize>,
    pub d: Vec<usize>,
    pub q: Vec<usize>,
    #[serde(rename = "P", default = "zero")]
    pub seasonal_p: Vec<usize>,
    #[serde(rename = "D", default = "zero")]
    pub seasonal_d: Vec<usize>,
    #[serde(rename = "Q", default = "zero")]
    pub seasonal_q: Vec<usize>,
    #[serde(default)]
    pub s: usize,
    /// Force the constant on or off. When unset a constant is included iff
    /// `d + D <= 1` (a mean, or a drift after one difference).
    #[serde(default)]
    pub constant: Option<bool>,
}

fn zero() -> Vec<usize> {
    vec![0]
}

impl OrderGrid {
    pub fn nonseasonal(p: Vec<usize>, d: Vec<usize>, q: Vec<usize>) -> Self {
        Self {
            p,
            d,
            q,
            seasonal_p: zero(),
            seasonal_d: zero(),
            seasonal_q: zero(),
            s: 0,
            constant: None,
        }
    }

    pub fn constant_for(&self, order: &SarimaxOrder) -> bool {
        self.constant.unwrap_or(order.d + order.seasonal_d <= 1)
    }

    /// Valid candidates in lexicographic `(p, d, q, P, D, Q)` order.
    pub fn candidates(&self) -> Vec<SarimaxOrder> {
        let sorted = |v: &[usize]| {
            let mut v = v.to_vec();
            v.sort_unstable();
            v.dedup();
            v
        };
        let mut out = Vec::new();
        for &p in &sorted(&self.p) {
            for &d in &sorted(&self.d) {
                for &q in &sorted(&self.q) {
                    for &sp in &sorted(&self.seasonal_p) {
                        for &sd in &sorted(&self.seasonal_d) {
                            for &sq in &sorted(&self.seasonal_q) {
                                let order = SarimaxOrder::seasonal((p, d, q), (sp, sd, sq), self.s);
                                if order.validate().is_ok() && (self.s > 0 || sp + sd + sq == 0) {
                                    out.push(order);
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SelectedOrder {
    pub order: SarimaxOrder,
    pub constant: bool,
    pub score: f64,
}

/// Fits every grid candidate and returns the one with the lowest criterion.
///
/// All candidates are scored on a common sample: the conditional sum of
/// squares starts after the longest differencing-plus-AR span in the grid.
/// Failed fits are skipped. Ties go to the candidate with fewer parameters,
/// then the lexicographically smallest order. Candidates are fitted in
/// parallel; the choice does not depend on evaluation order.
pub fn select_order(
    train: &PriceSeries,
    grid: &OrderGrid,
    criterion: Criterion,
) -> Result<SelectedOrder, ForecastError> {
    let candidates = grid.candidates();
    if candidates.is_empty() {
        return Err(ForecastError::Parameter("order grid is empty".into()));
    }
    let common_start = candidates
        .iter()
        .map(|o| o.d + o.s * o.seasonal_d + o.p + o.s * o.seasonal_p)
        .max()
        .unwrap_or(0);
    let scored: Vec<Option<SelectedOrder>> = candidates
        .par_iter()
        .map(|order| {
            let constant = grid.constant_for(order);
            let fitted = fit_conditioned(*order, constant, train, None, common_start).ok()?;
            let score = match criterion {
                Criterion::Aic => fitted.aic?,
                Criterion::Bic => fitted.bic?,
            };
            score.is_finite().then_some(SelectedOrder {
                order: *order,
                constant,
                score,
            })
        })
        .collect();

    let key = |c: &SelectedOrder| (c.order.coefficient_count() + usize::from(c.constant), c.order);
    scored
        .into_iter()
        .flatten()
        .min_by(|a, b| a.score.total_cmp(&b.score).then_with(|| key(a).cmp(&key(b))))
        .ok_or(ForecastError::NoViableOrder)
}
