//! Synthetic datasets and game logs with known generating parameters.

use std::collections::HashMap;

use chrono::NaiveDate;
use rand::Rng;
use rand_distr::{Distribution, Normal, StandardNormal};

use crate::batting::WalkConfig;
use crate::era::{NoiseParams, ERA_FLOOR};
use crate::error::{Error, Result};
use crate::ingest::{RawGameRow, Record, DEFAULT_WIN_PCT};
use crate::model::{GameRecord, TeamId, TeamStats};
use crate::rng::{self, derive_seed, SimRng};
use crate::season::{synthetic_schedule, LeagueStructure};

/// Games whose three ratios are log-uniform on `[0.8, 1.25]` and whose
/// outcomes follow the model with exponents `r`.
///
/// Away covariates are fixed (0.5, 0.250, 4.00) and the home side is scaled
/// to hit each ratio, so the records carry exactly the sampled ratios.
pub fn recovery_dataset(n: usize, r: [f64; 3], seed: u64) -> Vec<GameRecord> {
    let mut rng = rng::stream(seed, rng::tags::SYNTHETIC);
    let log_range = 1.25f64.ln();
    let start = NaiveDate::from_ymd_opt(2024, 5, 20).expect("valid date");
    (0..n)
        .map(|i| {
            let mut ratio = || (rng.random_range(-log_range..=log_range)).exp();
            let (alpha, beta, gamma) = (ratio(), ratio(), ratio());
            let lambda = alpha.powf(r[0]) * beta.powf(r[1]) * gamma.powf(r[2]);
            let home_won = rng.random_bool(lambda / (1.0 + lambda));
            let away = TeamStats {
                win_pct: 0.5,
                batting_avg: 0.25,
                starter_era: 4.0,
            };
            GameRecord {
                date: start + chrono::Days::new((i / 15) as u64 % 90),
                home_team: TeamId::new("HOM"),
                away_team: TeamId::new("AWY"),
                home: TeamStats {
                    win_pct: 0.5 * alpha,
                    batting_avg: 0.25 * beta,
                    starter_era: 4.0 / gamma,
                },
                away,
                home_won,
                home_played: 60,
                away_played: 60,
                winpct_defaulted: false,
            }
        })
        .collect()
}

/// Games whose ratios are all one, so the likelihood ignores the exponents.
pub fn flat_dataset(n: usize, seed: u64) -> Vec<GameRecord> {
    let mut rng = rng::stream(seed, rng::tags::SYNTHETIC);
    let stats = TeamStats {
        win_pct: 0.5,
        batting_avg: 0.25,
        starter_era: 4.0,
    };
    let date = NaiveDate::from_ymd_opt(2024, 6, 1).expect("valid date");
    (0..n)
        .map(|_| GameRecord {
            date,
            home_team: TeamId::new("HOM"),
            away_team: TeamId::new("AWY"),
            home: stats,
            away: stats,
            home_won: rng.random_bool(0.5),
            home_played: 60,
            away_played: 60,
            winpct_defaulted: false,
        })
        .collect()
}

/// Settings for a synthetic multi-season game log.
#[derive(Debug, Clone, PartialEq)]
pub struct LeagueLogSpec {
    pub league: LeagueStructure,
    /// Complete seasons, by calendar year.
    pub seasons: Vec<i32>,
    /// A partial season and the number of rounds already played.
    pub current: Option<(i32, u32)>,
    /// Exponents that generate the outcomes.
    pub r: [f64; 3],
    pub walk: WalkConfig,
    pub era_noise: NoiseParams,
    /// Spread of team batting talent around the league mean.
    pub batting_spread: f64,
    /// Mean and spread of team starter-ERA levels.
    pub era_level: (f64, f64),
    /// Emit pregame win percentages rather than leaving them to be derived.
    pub explicit_win_pct: bool,
    pub seed: u64,
}

impl LeagueLogSpec {
    pub fn new(league: LeagueStructure, seasons: Vec<i32>, seed: u64) -> Self {
        LeagueLogSpec {
            league,
            seasons,
            current: None,
            r: [0.5, 1.0, 0.5],
            walk: WalkConfig::default(),
            era_noise: NoiseParams {
                sigma_obs: 0.5,
                sigma_process: 0.05,
            },
            batting_spread: 0.012,
            era_level: (4.2, 0.5),
            explicit_win_pct: false,
            seed,
        }
    }
}

struct TeamSeason {
    record: Record,
    batting_base: f64,
    batting_dev: f64,
    era_latent: f64,
}

impl TeamSeason {
    fn new(spec: &LeagueLogSpec, rng: &mut SimRng) -> Result<Self> {
        let talent =
            Normal::new(0.0, spec.batting_spread).map_err(|e| Error::config(e.to_string()))?;
        let level = Normal::new(spec.era_level.0, spec.era_level.1)
            .map_err(|e| Error::config(e.to_string()))?;
        Ok(TeamSeason {
            record: Record::default(),
            batting_base: talent.sample(rng),
            batting_dev: 0.0,
            era_latent: level.sample(rng).clamp(2.5, 6.5),
        })
    }

    fn pregame<R: Rng + ?Sized>(&self, spec: &LeagueLogSpec, rng: &mut R) -> TeamStats {
        let z: f64 = StandardNormal.sample(rng);
        TeamStats {
            win_pct: self.record.win_pct().unwrap_or(DEFAULT_WIN_PCT),
            batting_avg: spec
                .walk
                .implied_average(self.batting_base + self.batting_dev),
            starter_era: (self.era_latent + spec.era_noise.sigma_obs * z).max(ERA_FLOOR),
        }
    }

    fn advance<R: Rng + ?Sized>(&mut self, won: bool, spec: &LeagueLogSpec, rng: &mut R) {
        if won {
            self.record.wins += 1;
        } else {
            self.record.losses += 1;
        }
        self.batting_dev += spec.walk.step(rng);
        let z: f64 = StandardNormal.sample(rng);
        self.era_latent += spec.era_noise.sigma_process * z;
    }
}

fn opening_day(year: i32) -> Result<NaiveDate> {
    NaiveDate::from_ymd_opt(year, 3, 27)
        .ok_or_else(|| Error::config(format!("year {year} out of range")))
}

fn season_rows(spec: &LeagueLogSpec, year: i32, rounds: u32) -> Result<Vec<RawGameRow>> {
    let season_seed = derive_seed(spec.seed, year as u64);
    let schedule = synthetic_schedule(
        &spec.league,
        0,
        rounds as usize,
        opening_day(year)?,
        season_seed,
    )?;
    let mut rng = rng::stream(season_seed, rng::tags::SYNTHETIC);
    let mut teams: HashMap<TeamId, TeamSeason> = HashMap::new();
    for t in spec.league.teams() {
        teams.insert(t, TeamSeason::new(spec, &mut rng)?);
    }
    let mut rows = Vec::with_capacity(schedule.len());
    for g in &schedule.games {
        let home = teams[&g.home].pregame(spec, &mut rng);
        let away = teams[&g.away].pregame(spec, &mut rng);
        let ratios = crate::model::ratios_from_records(&home, &away);
        let lambda = ratios.alpha.powf(spec.r[0])
            * ratios.beta.powf(spec.r[1])
            * ratios.gamma.powf(spec.r[2]);
        let home_won = rng.random_bool(lambda / (1.0 + lambda));
        teams
            .get_mut(&g.home)
            .expect("scheduled team")
            .advance(home_won, spec, &mut rng);
        teams
            .get_mut(&g.away)
            .expect("scheduled team")
            .advance(!home_won, spec, &mut rng);
        rows.push(RawGameRow {
            row: 0,
            date: g.date,
            home: g.home.clone(),
            away: g.away.clone(),
            home_won,
            runs: None,
            winpct_pre: spec
                .explicit_win_pct
                .then_some((home.win_pct, away.win_pct)),
            home_avg_pre: round_to(home.batting_avg, 4),
            away_avg_pre: round_to(away.batting_avg, 4),
            home_era_pre: round_to(home.starter_era, 3),
            away_era_pre: round_to(away.starter_era, 3),
        });
    }
    Ok(rows)
}

fn round_to(x: f64, digits: i32) -> f64 {
    let s = 10f64.powi(digits);
    (x * s).round() / s
}

/// A date-sorted game log covering the complete seasons and, if set, the
/// played part of the current season. Row numbers match a written file.
pub fn league_game_log(spec: &LeagueLogSpec) -> Result<Vec<RawGameRow>> {
    spec.league.validate()?;
    let mut rows = Vec::new();
    for &year in &spec.seasons {
        rows.extend(season_rows(spec, year, spec.league.season_length)?);
    }
    if let Some((year, rounds)) = spec.current {
        if spec.seasons.contains(&year) {
            return Err(Error::config(format!(
                "season {year} is listed as both complete and current"
            )));
        }
        if rounds > spec.league.season_length {
            return Err(Error::config(format!(
                "{rounds} rounds played exceeds the season length"
            )));
        }
        rows.extend(season_rows(spec, year, rounds)?);
    }
    rows.sort_by_key(|r| r.date);
    for (i, r) in rows.iter_mut().enumerate() {
        r.row = i + 2;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{derive_pregame_records, standings};

    #[test]
    fn recovery_ratios_are_in_range() {
        let games = recovery_dataset(500, [1.5, 0.8, 0.6], 7);
        for g in &games {
            let r = g.ratios();
            for v in [r.alpha, r.beta, r.gamma] {
                assert!((0.8 - 1e-12..=1.25 + 1e-12).contains(&v), "{v}");
            }
        }
        assert_eq!(games, recovery_dataset(500, [1.5, 0.8, 0.6], 7));
    }

    #[test]
    fn current_season_stops_after_played_rounds() {
        let mut spec = LeagueLogSpec::new(LeagueStructure::mlb(), vec![2024], 11);
        spec.current = Some((2025, 20));
        let rows = league_game_log(&spec).unwrap();
        assert_eq!(rows.len(), 2430 + 20 * 15);
        let now: Vec<_> = rows
            .iter()
            .filter(|r| r.season() == 2025)
            .cloned()
            .collect();
        assert!(standings(&now).values().all(|r| r.played() == 20));
        assert!(rows.windows(2).all(|w| w[0].date <= w[1].date));
    }

    #[test]
    fn explicit_win_pct_matches_derived() {
        let mut spec = LeagueLogSpec::new(LeagueStructure::mlb(), vec![2024], 3);
        spec.explicit_win_pct = true;
        let explicit = league_game_log(&spec).unwrap();
        let stripped: Vec<_> = explicit
            .iter()
            .cloned()
            .map(|r| RawGameRow {
                winpct_pre: None,
                ..r
            })
            .collect();
        let a = derive_pregame_records(&explicit).unwrap();
        let b = derive_pregame_records(&stripped).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(
                (x.home.win_pct, x.away.win_pct),
                (y.home.win_pct, y.away.win_pct)
            );
        }
    }
}
