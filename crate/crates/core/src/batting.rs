//! Team batting average as a zero-centred Gaussian random walk around the
//! league mean.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::stats;

pub const DEFAULT_STEP_STD: f64 = 0.0015;
pub const DEFAULT_CLAMP: (f64, f64) = (0.150, 0.400);
pub const DEFAULT_LEAGUE_MEAN: f64 = 0.245;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    /// Standard deviation of one per-game increment.
    pub step_std: f64,
    pub league_mean: f64,
    pub clamp: (f64, f64),
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            step_std: DEFAULT_STEP_STD,
            league_mean: DEFAULT_LEAGUE_MEAN,
            clamp: DEFAULT_CLAMP,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.clamp;
        if !(self.step_std.is_finite() && self.step_std > 0.0) {
            return Err(Error::config(format!(
                "walk step std must be positive, got {}",
                self.step_std
            )));
        }
        if !(0.0 < lo && lo < self.league_mean && self.league_mean < hi && hi < 1.0) {
            return Err(Error::config(format!(
                "need 0 < clamp low < league mean < clamp high < 1, got {lo} / {} / {hi}",
                self.league_mean
            )));
        }
        Ok(())
    }

    /// Batting average implied by a deviation, clamped to the configured bounds.
    pub fn implied_average(&self, deviation: f64) -> f64 {
        (self.league_mean + deviation).clamp(self.clamp.0, self.clamp.1)
    }

    /// Draws one increment.
    pub fn step<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let z: f64 = rand_distr::StandardNormal.sample(rng);
        self.step_std * z
    }
}

/// A simulated deviation trajectory; `deviations[0]` is the start.
#[derive(Debug, Clone, PartialEq)]
pub struct BattingPath {
    pub start_deviation: f64,
    pub deviations: Vec<f64>,
    pub cfg: WalkConfig,
}

impl BattingPath {
    pub fn implied_averages(&self) -> Vec<f64> {
        self.deviations
            .iter()
            .map(|&d| self.cfg.implied_average(d))
            .collect()
    }

    pub fn increments(&self) -> Vec<f64> {
        self.deviations.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Sample standard deviation of first differences.
///
/// A zero result (e.g. an arithmetic sequence) is returned as-is with a
/// warning rather than treated as an error.
pub fn estimate_step_std(series: &[f64]) -> Result<f64> {
    if series.len() < 3 {
        return Err(Error::insufficient(format!(
            "need at least 3 values to estimate a step std, got {}",
            series.len()
        )));
    }
    let diffs: Vec<f64> = series.windows(2).map(|w| w[1] - w[0]).collect();
    let sd = stats::sample_std(&diffs);
    if sd == 0.0 {
        log::warn!("degenerate random-walk fit: increments have zero variance");
    }
    Ok(sd)
}

/// League-pooled step std: first differences of every series (each of length
/// at least 2) are pooled around their common mean. Series shorter than two
/// values are skipped.
pub fn estimate_pooled_step_std(series: &[Vec<f64>]) -> Result<f64> {
    let diffs: Vec<f64> = series
        .iter()
        .filter(|s| s.len() >= 2)
        .flat_map(|s| s.windows(2).map(|w| w[1] - w[0]))
        .collect();
    if diffs.len() < 2 {
        return Err(Error::insufficient(
            "not enough batting-average history to estimate a step std",
        ));
    }
    let sd = stats::sample_std(&diffs);
    if sd == 0.0 {
        log::warn!("degenerate random-walk fit: pooled increments have zero variance");
    }
    Ok(sd)
}

/// Simulates `n_steps` increments from `start_deviation`.
pub fn simulate_walk<R: Rng + ?Sized>(
    start_deviation: f64,
    n_steps: usize,
    cfg: &WalkConfig,
    rng: &mut R,
) -> Result<BattingPath> {
    cfg.validate()?;
    let normal = Normal::new(0.0, cfg.step_std).map_err(|e| Error::config(e.to_string()))?;
    let mut deviations = Vec::with_capacity(n_steps + 1);
    let mut d = start_deviation;
    deviations.push(d);
    for _ in 0..n_steps {
        d += normal.sample(rng);
        deviations.push(d);
    }
    Ok(BattingPath {
        start_deviation,
        deviations,
        cfg: *cfg,
    })
}
