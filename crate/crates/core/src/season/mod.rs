//! Replicated simulation of the remainder of a season.

mod league;
mod playoffs;
mod schedule;
mod sim;
mod summary;

pub use league::{Division, League, LeagueStructure, DEFAULT_SEASON_LENGTH};
pub use playoffs::{playoff_qualifiers, PlayoffFormat};
pub use schedule::{synthetic_schedule, Schedule, ScheduledGame};
pub use sim::{
    replication_seed, run_replication, run_replications, simulate_game, update_after_game,
    DrawMode, EraMode, ExponentSource, Forecast, NoiseSource, OutcomeMode, SeasonResult, SimConfig,
    TeamOpening, TeamSimState, DEFAULT_BURN_IN_GAMES,
};
pub use summary::{
    export_win_histogram, read_results_csv, summarize, write_results_csv, ForecastSummary,
    TeamForecast, WinHistogram, SUMMARY_HEADER,
};
