//! Starting-pitcher ERA as a local-level state-space model.
//!
//! ```text
//! x[t+1] = x[t] + w[t],   w ~ N(0, sigma_process^2)
//! y[t]   = x[t] + v[t],   v ~ N(0, sigma_obs^2)
//! ```

mod kalman;
mod noise;
mod terciles;

pub use kalman::{
    filter_series, filter_step, forecast, simulate_era_path, EraPath, FilterOutput, KalmanState,
    NoiseParams, ERA_FLOOR,
};
pub use noise::{
    estimate_noise, read_pool_csv, sample_noise, sliding_noise_estimates, write_pool_csv,
    NoiseEstimate, NoiseFit, NoisePools, PooledEstimate, MIN_WINDOW, SIGMA_BOUNDS,
};
pub use terciles::{group_terciles, Tercile, TercileGrouping, EARLY_GAMES};
