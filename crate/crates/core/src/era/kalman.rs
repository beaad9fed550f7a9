use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Smallest ERA emitted by simulation.
pub const ERA_FLOOR: f64 = 0.01;

/// Filtered belief about the latent ERA level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KalmanState {
    pub mean: f64,
    pub variance: f64,
}

impl KalmanState {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !mean.is_finite() || !(variance.is_finite() && variance >= 0.0) {
            return Err(Error::domain(format!(
                "invalid Kalman state ({mean}, {variance})"
            )));
        }
        Ok(KalmanState { mean, variance })
    }

    /// One step of the process model with no observation.
    pub fn propagate(&self, noise: &NoiseParams) -> KalmanState {
        KalmanState {
            mean: self.mean,
            variance: self.variance + noise.process_variance(),
        }
    }
}

/// Observation and process noise standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub sigma_obs: f64,
    pub sigma_process: f64,
}

impl NoiseParams {
    pub fn new(sigma_obs: f64, sigma_process: f64) -> Result<Self> {
        let p = NoiseParams {
            sigma_obs,
            sigma_process,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("sigma_obs", self.sigma_obs),
            ("sigma_process", self.sigma_process),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    pub fn obs_variance(&self) -> f64 {
        self.sigma_obs * self.sigma_obs
    }

    pub fn process_variance(&self) -> f64 {
        self.sigma_process * self.sigma_process
    }
}

/// Predict with the process model, then condition on `observation`.
pub fn filter_step(
    state: &KalmanState,
    observation: f64,
    noise: &NoiseParams,
) -> Result<KalmanState> {
    Ok(step_with_prediction(state, observation, noise)?.0)
}

fn step_with_prediction(
    state: &KalmanState,
    observation: f64,
    noise: &NoiseParams,
) -> Result<(KalmanState, KalmanState)> {
    noise.validate()?;
    let predicted = state.propagate(noise);
    let innovation_var = predicted.variance + noise.obs_variance();
    if innovation_var == 0.0 {
        return Err(Error::domain(
            "Kalman gain undefined: zero predicted and observation variance",
        ));
    }
    let gain = predicted.variance / innovation_var;
    let filtered = KalmanState {
        mean: predicted.mean + gain * (observation - predicted.mean),
        variance: predicted.variance * (1.0 - gain),
    };
    Ok((filtered, predicted))
}

/// Filtered states plus the one-step-ahead predictions that produced them.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterOutput {
    pub filtered: Vec<KalmanState>,
    /// Prediction of `x[t]` before seeing `y[t]`; the observation's predictive
    /// variance is `predicted[t].variance + sigma_obs^2`.
    pub predicted: Vec<KalmanState>,
}

impl FilterOutput {
    pub fn last(&self) -> KalmanState {
        *self.filtered.last().expect("filter output is never empty")
    }

    /// Gaussian prediction-error log-likelihood, skipping the first `skip`
    /// observations.
    pub fn log_likelihood(&self, observations: &[f64], noise: &NoiseParams, skip: usize) -> f64 {
        let mut ll = 0.0;
        for (pred, y) in self.predicted.iter().zip(observations).skip(skip) {
            let f = pred.variance + noise.obs_variance();
            let v = y - pred.mean;
            ll -= 0.5 * ((2.0 * std::f64::consts::PI * f).ln() + v * v / f);
        }
        ll
    }
}

pub fn filter_series(
    init: &KalmanState,
    observations: &[f64],
    noise: &NoiseParams,
) -> Result<FilterOutput> {
    if observations.is_empty() {
        return Err(Error::insufficient(
            "filter_series needs at least one observation",
        ));
    }
    let mut filtered = Vec::with_capacity(observations.len());
    let mut predicted = Vec::with_capacity(observations.len());
    let mut state = *init;
    for &y in observations {
        let (f, p) = step_with_prediction(&state, y, noise)?;
        filtered.push(f);
        predicted.push(p);
        state = f;
    }
    Ok(FilterOutput {
        filtered,
        predicted,
    })
}

/// Pure process-model forecast for steps `1..=horizon`.
pub fn forecast(state: &KalmanState, horizon: usize, noise: &NoiseParams) -> Vec<KalmanState> {
    let q = noise.process_variance();
    (1..=horizon)
        .map(|h| KalmanState {
            mean: state.mean,
            variance: state.variance + h as f64 * q,
        })
        .collect()
}

/// Latent and observed ERA paths, both floored at [`ERA_FLOOR`] on output.
#[derive(Debug, Clone, PartialEq)]
pub struct EraPath {
    pub latent: Vec<f64>,
    pub observed: Vec<f64>,
}

/// Simulates `n_steps` games of the local-level model starting at `init_mean`.
///
/// The latent level evolves unfloored; only the emitted values are floored.
pub fn simulate_era_path<R: Rng + ?Sized>(
    init_mean: f64,
    noise: &NoiseParams,
    n_steps: usize,
    rng: &mut R,
) -> Result<EraPath> {
    noise.validate()?;
    if !(init_mean.is_finite() && init_mean >= 0.0) {
        return Err(Error::domain(format!(
            "initial ERA must be nonnegative, got {init_mean}"
        )));
    }
    let mut latent = Vec::with_capacity(n_steps);
    let mut observed = Vec::with_capacity(n_steps);
    let mut x = init_mean;
    for t in 0..n_steps {
        if t > 0 {
            let w: f64 = StandardNormal.sample(rng);
            x += noise.sigma_process * w;
        }
        let v: f64 = StandardNormal.sample(rng);
        latent.push(x.max(ERA_FLOOR));
        observed.push((x + noise.sigma_obs * v).max(ERA_FLOOR));
    }
    Ok(EraPath { latent, observed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn perfect_observation_takes_the_observation() {
        let s = KalmanState::new(4.0, 1.0).unwrap();
        let n = NoiseParams::new(0.0, 0.2).unwrap();
        let f = filter_step(&s, 3.1, &n).unwrap();
        assert_eq!(f.mean, 3.1);
        assert_eq!(f.variance, 0.0);
    }

    #[test]
    fn worked_update() {
        // Joint normal of (x1, y1): x1 ~ N(4, 1.01), y1 = x1 + N(0, 0.25).
        // E[x1 | y1 = 3.5] = 4 + 1.01 / 1.26 * (-0.5); Var = 1.01 - 1.01^2 / 1.26.
        let s = KalmanState::new(4.0, 1.0).unwrap();
        let n = NoiseParams::new(0.5, 0.1).unwrap();
        let f = filter_step(&s, 3.5, &n).unwrap();
        assert!((f.mean - (4.0 - 1.01 / 1.26 * 0.5)).abs() < 1e-12);
        assert!((f.variance - (1.01 - 1.01 * 1.01 / 1.26)).abs() < 1e-12);
        assert!((f.mean - 3.5992).abs() < 1e-4);
        assert!((f.variance - 0.2004).abs() < 1e-4);
    }

    #[test]
    fn uninformative_observation_keeps_prior_mean() {
        let s = KalmanState::new(4.0, 1.0).unwrap();
        let n = NoiseParams::new(1e9, 0.1).unwrap();
        let f = filter_step(&s, 100.0, &n).unwrap();
        assert!((f.mean - 4.0).abs() < 1e-6);
    }

    #[test]
    fn zero_variances_error() {
        let s = KalmanState::new(4.0, 0.0).unwrap();
        assert!(filter_step(&s, 3.0, &NoiseParams::new(0.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn series_single_observation_equals_step() {
        let s = KalmanState::new(3.0, 0.5).unwrap();
        let n = NoiseParams::new(0.7, 0.05).unwrap();
        let out = filter_series(&s, &[2.5], &n).unwrap();
        assert_eq!(out.filtered, vec![filter_step(&s, 2.5, &n).unwrap()]);
        assert!(filter_series(&s, &[], &n).is_err());
    }

    #[test]
    fn constant_observations_shrink_variance() {
        let s = KalmanState::new(5.0, 2.0).unwrap();
        let n = NoiseParams::new(0.5, 0.0).unwrap();
        let out = filter_series(&s, &[3.0; 30], &n).unwrap();
        for w in out.filtered.windows(2) {
            assert!(w[1].variance < w[0].variance);
            assert!((w[1].mean - 3.0).abs() <= (w[0].mean - 3.0).abs());
        }
        assert!((out.last().mean - 3.0).abs() < 0.05);
    }

    #[test]
    fn forecast_contract() {
        let s = KalmanState::new(3.8, 0.2).unwrap();
        let n = NoiseParams::new(0.5, 0.1).unwrap();
        assert!(forecast(&s, 0, &n).is_empty());
        let f = forecast(&s, 5, &n);
        assert!(f.iter().all(|k| k.mean == 3.8));
        assert!((f[4].variance - 0.25).abs() < 1e-12);
    }

    #[test]
    fn era_path_floor_and_constant() {
        let mut rng = rng_from_seed(3);
        let p = simulate_era_path(3.2, &NoiseParams::new(0.0, 0.0).unwrap(), 50, &mut rng).unwrap();
        assert!(p.observed.iter().all(|&y| y == 3.2));

        let p =
            simulate_era_path(0.05, &NoiseParams::new(2.0, 0.5).unwrap(), 500, &mut rng).unwrap();
        assert!(p.observed.iter().chain(&p.latent).all(|&y| y >= ERA_FLOOR));
        assert!(
            simulate_era_path(-1.0, &NoiseParams::new(1.0, 0.1).unwrap(), 5, &mut rng).is_err()
        );
    }

    #[test]
    fn era_path_observation_noise_variance() {
        let noise = NoiseParams::new(0.5, 0.05).unwrap();
        let mut rng = rng_from_seed(17);
        let mut resid = Vec::new();
        for _ in 0..10_000 {
            let p = simulate_era_path(4.0, &noise, 10, &mut rng).unwrap();
            resid.push(p.observed[9] - p.latent[9]);
        }
        let var = crate::stats::sample_variance(&resid);
        assert!((var / 0.25 - 1.0).abs() < 0.05, "{var}");
    }
}
