//! Input loading shared by the commands.

use std::collections::BTreeMap;
use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use pennant_core::era::{group_terciles, TercileGrouping, EARLY_GAMES};
use pennant_core::ingest::{read_game_log, team_series, Covariate, RawGameRow};
use pennant_core::{LeagueStructure, TeamId};

use crate::config::Settings;

/// Input data that parsed but failed a check; exits with status 1.
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InvalidInput {}

/// The league file if given, otherwise the built-in 30-team layout.
pub fn load_league(settings: &Settings) -> Result<LeagueStructure> {
    let mut league = match &settings.league {
        Some(p) => LeagueStructure::read(p, settings.season_length)
            .map_err(|e| InvalidInput(e.to_string()))?,
        None => LeagueStructure::mlb(),
    };
    league.season_length = settings.season_length;
    league.validate().map_err(|e| InvalidInput(e.to_string()))?;
    Ok(league)
}

pub fn load_rows(path: &Path, league: &LeagueStructure) -> Result<Vec<RawGameRow>> {
    let rows =
        read_game_log(path, Some(&league.team_set())).map_err(|e| InvalidInput(e.to_string()))?;
    if rows.is_empty() {
        return Err(InvalidInput(format!("game log {} has no games", path.display())).into());
    }
    Ok(rows)
}

/// The latest season in a log is the one being forecast; earlier ones are history.
pub struct SeasonSplit {
    pub current_season: i32,
    pub history: Vec<RawGameRow>,
    pub current: Vec<RawGameRow>,
}

impl SeasonSplit {
    pub fn new(rows: Vec<RawGameRow>) -> Self {
        let current_season = rows
            .iter()
            .map(RawGameRow::season)
            .max()
            .unwrap_or_default();
        let (current, history) = rows.into_iter().partition(|r| r.season() == current_season);
        SeasonSplit {
            current_season,
            history,
            current,
        }
    }

    /// History when there is any, else the current season alone.
    pub fn training(&self) -> &[RawGameRow] {
        if self.history.is_empty() {
            &self.current
        } else {
            &self.history
        }
    }
}

/// A season's tercile grouping with the early-ERA means behind it.
pub type SeasonTerciles = (TercileGrouping, BTreeMap<TeamId, f64>);

/// Tercile grouping of each season by mean starter ERA over each team's first games.
pub fn season_terciles(rows: &[RawGameRow]) -> Result<BTreeMap<i32, SeasonTerciles>> {
    let mut early: BTreeMap<i32, BTreeMap<TeamId, f64>> = BTreeMap::new();
    for ((season, team), series) in team_series(rows, Covariate::StarterEra) {
        let head = &series[..series.len().min(EARLY_GAMES)];
        early
            .entry(season)
            .or_default()
            .insert(team, head.iter().sum::<f64>() / head.len() as f64);
    }
    early
        .into_iter()
        .map(|(season, eras)| {
            let grouping = group_terciles(&eras)
                .with_context(|| format!("grouping season {season} into terciles"))?;
            Ok((season, (grouping, eras)))
        })
        .collect()
}

/// Buffered writer for a file in the output directory.
pub fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

/// Writes `key = value` lines.
pub fn write_meta(path: &Path, entries: &[(&str, String)]) -> Result<()> {
    let mut w = create(path)?;
    for (k, v) in entries {
        writeln!(w, "{k} = {v}")?;
    }
    w.flush()?;
    Ok(())
}
