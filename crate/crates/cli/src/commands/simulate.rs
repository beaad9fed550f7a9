use std::collections::BTreeMap;
use std::fs::File;

use anyhow::{Context, Result};
use chrono::Days;
use log::info;
use pennant_core::era::{read_pool_csv, NoisePools, Tercile};
use pennant_core::ingest::{standings, team_series, Covariate};
use pennant_core::mcmc::{read_draws_csv, PosteriorSample};
use pennant_core::season::{
    synthetic_schedule, write_results_csv, DrawMode, EraMode, ExponentSource, Forecast,
    NoiseSource, OutcomeMode, Schedule, TeamOpening,
};
use pennant_core::{LeagueStructure, TeamId};

use super::report::{write_summary, RESULTS_FILE};
use crate::config::Settings;
use crate::data::{
    create, load_league, load_rows, season_terciles, write_meta, InvalidInput, SeasonSplit,
};
use crate::{Outcome, UsageError};

pub fn run(s: &Settings, histograms: &[String]) -> Result<Outcome> {
    let log_path = s.require_game_log()?;
    let league = load_league(s)?;
    let teams = league.team_set();
    let hist_teams: Vec<TeamId> = histograms
        .iter()
        .map(|t| {
            let id = TeamId::new(t.as_str());
            if teams.contains(&id) {
                Ok(id)
            } else {
                Err(UsageError::new(format!(
                    "histogram requested for unknown team `{t}`"
                )))
            }
        })
        .collect::<Result<_, _>>()?;
    let split = SeasonSplit::new(load_rows(log_path, &league)?);
    let (source, draws_origin) = exponent_source(s)?;
    let (noise, noise_origin) = noise_source(s)?;
    let openings = openings(&split, &league, s)?;
    let (schedule, schedule_origin) = match &s.schedule {
        Some(p) if !p.is_file() => {
            return Err(UsageError::new(format!("schedule {} does not exist", p.display())).into())
        }
        Some(p) => (
            Schedule::read(p).map_err(|e| InvalidInput(e.to_string()))?,
            p.display().to_string(),
        ),
        None => (
            remaining_schedule(&split, &league, &openings, s.seed)?,
            "synthetic".to_owned(),
        ),
    };
    let forecast = Forecast::new(league, &schedule, openings, source, noise, s.sim.clone())
        .map_err(|e| InvalidInput(e.to_string()))?;
    info!(
        "simulating {} games x {} replications",
        forecast.scheduled_games(),
        s.replications
    );
    let results = forecast.run_replications(s.replications, s.seed)?;

    s.create_out_dir()?;
    write_results_csv(&results, create(&s.out_file(RESULTS_FILE))?)?;
    let summary = write_summary(s, &results, &hist_teams)?;
    write_meta(
        &s.out_file("simulate_meta.txt"),
        &[
            ("seed", s.seed.to_string()),
            ("replications", s.replications.to_string()),
            ("current_season", split.current_season.to_string()),
            ("schedule", schedule_origin.clone()),
            ("scheduled_games", schedule.len().to_string()),
            ("exponents", draws_origin),
            ("noise", noise_origin),
            (
                "outcome_mode",
                match s.sim.outcome {
                    OutcomeMode::Marginal => "marginal",
                    OutcomeMode::TwoStage => "two-stage",
                }
                .into(),
            ),
            (
                "draw_mode",
                match s.sim.draws {
                    DrawMode::PosteriorPredictive => "posterior-predictive",
                    DrawMode::Point => "point",
                }
                .into(),
            ),
            (
                "era_mode",
                match s.sim.era {
                    EraMode::ForecastMean => "forecast-mean",
                    EraMode::Path => "path",
                }
                .into(),
            ),
            ("m", s.sim.m.to_string()),
            ("burn_in_games", s.sim.burn_in_games.to_string()),
            ("walk_step_std", s.sim.walk.step_std.to_string()),
            ("wild_cards", s.sim.playoffs.wild_cards.to_string()),
        ],
    )?;
    print!("{}", summary.to_table());
    if schedule_origin == "synthetic" {
        println!("note: remaining schedule is synthetic (balanced rounds, division-weighted)");
    }
    Ok(Outcome::Clean)
}

fn exponent_source(s: &Settings) -> Result<(ExponentSource, String)> {
    if let Some(r) = s.point_exponents {
        return Ok((
            ExponentSource::new(PosteriorSample::point(r), DrawMode::Point)?,
            format!("fixed {r:?}"),
        ));
    }
    let path = s.out_file("draws.csv");
    if !path.is_file() {
        return Err(UsageError::new(format!(
            "{} not found; run `pennant fit` first or set `point_exponents`",
            path.display()
        ))
        .into());
    }
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let draws = read_draws_csv(file, &path.display().to_string())?;
    Ok((
        ExponentSource::new(PosteriorSample::new(draws)?, s.sim.draws)?,
        "draws.csv".to_owned(),
    ))
}

fn noise_source(s: &Settings) -> Result<(NoiseSource, String)> {
    if let Some(p) = s.fixed_noise {
        return Ok((
            NoiseSource::Fixed(p),
            format!(
                "fixed sigma_obs={} sigma_process={}",
                p.sigma_obs, p.sigma_process
            ),
        ));
    }
    let path = s.out_file("noise_pool.csv");
    if !path.is_file() {
        return Err(UsageError::new(format!(
            "{} not found; run `pennant noise` first or set `sigma_obs` and `sigma_process`",
            path.display()
        ))
        .into());
    }
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let pools = NoisePools::from_estimates(&read_pool_csv(file, &path.display().to_string())?);
    if let Some(t) = Tercile::ALL
        .into_iter()
        .find(|&t| pools.group(t).is_empty())
    {
        return Err(InvalidInput(format!(
            "the {t} tercile noise pool is empty; rerun `pennant noise` with more history"
        ))
        .into());
    }
    Ok((NoiseSource::Pooled(pools), "noise_pool.csv".to_owned()))
}

/// Each team's record, latest batting average, ERA history and tercile in the current season.
fn openings(
    split: &SeasonSplit,
    league: &LeagueStructure,
    s: &Settings,
) -> Result<Vec<TeamOpening>> {
    let season = split.current_season;
    let records = standings(&split.current);
    let mut eras: BTreeMap<TeamId, Vec<f64>> = BTreeMap::new();
    let mut batting: BTreeMap<TeamId, f64> = BTreeMap::new();
    for ((_, team), series) in team_series(&split.current, Covariate::StarterEra) {
        eras.insert(team, series);
    }
    for ((_, team), series) in team_series(&split.current, Covariate::BattingAvg) {
        batting.insert(team, *series.last().expect("series are never empty"));
    }
    let terciles = season_terciles(&split.current)?;
    let grouping = &terciles.get(&season).expect("current season is present").0;
    league
        .teams()
        .into_iter()
        .map(|team| {
            let rec = records.get(&team).copied().unwrap_or_default();
            if rec.played() < s.sim.burn_in_games.max(1) {
                return Err(InvalidInput(format!(
                    "{team} has played {} games in {season}, fewer than the {}-game burn-in",
                    rec.played(),
                    s.sim.burn_in_games.max(1)
                ))
                .into());
            }
            Ok(TeamOpening {
                wins: rec.wins,
                losses: rec.losses,
                batting_avg: batting[&team],
                era_observations: eras.remove(&team).unwrap_or_default(),
                tercile: grouping.tercile_of(&team).unwrap_or(Tercile::Medium),
                team,
            })
        })
        .collect()
}

/// Synthetic rounds for the rest of the season, continuing the day after the last real game.
fn remaining_schedule(
    split: &SeasonSplit,
    league: &LeagueStructure,
    openings: &[TeamOpening],
    seed: u64,
) -> Result<Schedule> {
    let played = openings[0].wins + openings[0].losses;
    if openings.iter().any(|o| o.wins + o.losses != played) {
        return Err(InvalidInput(
            "teams have played different numbers of games; supply a schedule file".into(),
        )
        .into());
    }
    let last = split
        .current
        .iter()
        .map(|r| r.date)
        .max()
        .expect("current season has games");
    let start = last
        .checked_add_days(Days::new(1))
        .context("schedule start date")?;
    let rounds = league.season_length.saturating_sub(played) as usize;
    Ok(synthetic_schedule(
        league,
        played as usize,
        rounds,
        start,
        seed,
    )?)
}
