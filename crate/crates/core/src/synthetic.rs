//! Seeded generators for demo and test data.

use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::ingest::{IngestError, PriceSeries};

pub const DEFAULT_SEED: u64 = 42;
/// Five years of weekly points.
pub const DEFAULT_LENGTH: usize = 260;

pub fn default_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2012, 1, 2).expect("valid date")
}

/// Knobs for [`seasonal_trend`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeasonalTrend {
    pub level: f64,
    pub slope: f64,
    pub amplitude: f64,
    pub period: usize,
    pub noise_sd: f64,
    /// AR(1) coefficient of the noise.
    pub persistence: f64,
}

impl Default for SeasonalTrend {
    fn default() -> Self {
        Self {
            level: 30.0,
            slope: 0.03,
            amplitude: 4.0,
            period: 52,
            noise_sd: 0.6,
            persistence: 0.5,
        }
    }
}

impl SeasonalTrend {
    pub fn values(&self, n: usize, seed: u64) -> Vec<f64> {
        let noise = ar1(self.persistence, n, self.noise_sd, seed);
        let m = self.period.max(1) as f64;
        (0..n)
            .map(|t| {
                let phase = 2.0 * std::f64::consts::PI * t as f64 / m;
                (self.level + self.slope * t as f64 + self.amplitude * phase.sin() + noise[t]).max(0.01)
            })
            .collect()
    }
}

/// Weekly seasonal+trend price series starting on the first Monday of 2012.
pub fn seasonal_trend(crop: &str, n: usize, seed: u64) -> Result<PriceSeries, IngestError> {
    // distinct crops get distinct draws from one seed
    let salt = crop.bytes().fold(0u64, |h, b| h.wrapping_mul(31).wrapping_add(b as u64));
    let values = SeasonalTrend::default().values(n, seed ^ salt);
    PriceSeries::from_values(crop, default_start(), &values)
}

/// Zero-mean AR(1) path `x_t = phi x_{t-1} + e_t`, `e_t ~ N(0, sd^2)`,
/// after a 100-step burn-in.
pub fn ar1(phi: f64, n: usize, sd: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, sd).expect("finite standard deviation");
    let mut x = 0.0;
    let mut out = Vec::with_capacity(n);
    for t in 0..n + 100 {
        x = phi * x + normal.sample(&mut rng);
        if t >= 100 {
            out.push(x);
        }
    }
    out
}
