//! Fixtures shared by the benchmarks.

use chrono::NaiveDate;
use pennant_core::era::{NoiseParams, Tercile};
use pennant_core::mcmc::PosteriorSample;
use pennant_core::rng::rng_from_seed;
use pennant_core::season::{
    synthetic_schedule, DrawMode, ExponentSource, Forecast, NoiseSource, SimConfig, TeamOpening,
};
use pennant_core::LeagueStructure;
use rand::Rng;

/// A 30-team forecast with `rounds` rounds already played by coin flip.
pub fn opened_forecast(rounds: usize, seed: u64) -> Forecast {
    let league = LeagueStructure::mlb();
    let start = NaiveDate::from_ymd_opt(2025, 3, 27).expect("valid date");
    let opened = synthetic_schedule(&league, 0, rounds, start, seed).expect("schedule");
    let next = opened
        .games
        .last()
        .expect("games")
        .date
        .succ_opt()
        .expect("date");
    let rest = synthetic_schedule(
        &league,
        rounds,
        league.season_length as usize - rounds,
        next,
        seed,
    )
    .expect("schedule");
    let mut rng = rng_from_seed(seed);
    let mut openings: Vec<TeamOpening> = league
        .teams()
        .into_iter()
        .enumerate()
        .map(|(i, team)| TeamOpening {
            team,
            wins: 0,
            losses: 0,
            batting_avg: 0.245 + rng.random_range(-0.02..0.02),
            era_observations: Vec::new(),
            tercile: [Tercile::Low, Tercile::Medium, Tercile::High][i % 3],
        })
        .collect();
    for g in &opened.games {
        let home_won = rng.random_bool(0.5);
        for o in openings.iter_mut() {
            if o.team == g.home || o.team == g.away {
                if (o.team == g.home) == home_won {
                    o.wins += 1;
                } else {
                    o.losses += 1;
                }
                o.era_observations.push(4.2 + rng.random_range(-1.5..1.5));
            }
        }
    }
    let sample = PosteriorSample::new(vec![[1.5, 0.8, 0.6], [1.3, 1.0, 0.5]]).expect("draws");
    Forecast::new(
        league,
        &rest,
        openings,
        ExponentSource::new(sample, DrawMode::PosteriorPredictive).expect("source"),
        NoiseSource::Fixed(NoiseParams::new(0.5, 0.05).expect("noise")),
        SimConfig::default(),
    )
    .expect("forecast")
}
