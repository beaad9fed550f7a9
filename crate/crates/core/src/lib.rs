//! Season forecasting for baseball leagues.
//!
//! Game outcomes follow a two-stage model whose home-strength ratio combines
//! win percentage, batting average and starter ERA under fitted exponents.
//! The exponents are sampled by Metropolis MCMC from historical logs; future
//! batting averages follow a Gaussian random walk and starter ERA a
//! local-level Kalman filter; the season is then replayed many times to get
//! win-total distributions and playoff odds.

pub mod batting;
pub mod era;
pub mod error;
pub mod ingest;
pub mod mcmc;
pub mod model;
pub mod optim;
pub mod rng;
pub mod season;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use model::{GamePrediction, GameRecord, ModelParams, StrengthRatios, TeamId, TeamStats};
pub use season::{ForecastSummary, LeagueStructure, Schedule, SeasonResult};
