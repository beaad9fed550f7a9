use std::io::Write;

use anyhow::Result;
use clap::Args;
use pennant_core::ingest::write_game_log;
use pennant_core::rng::derive_seed;
use pennant_core::season::synthetic_schedule;
use pennant_core::synthetic::{league_game_log, LeagueLogSpec};

use crate::config::Settings;
use crate::data::{create, load_league};
use crate::{Outcome, UsageError};

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Complete seasons to generate.
    #[arg(long, value_delimiter = ',', default_values_t = [2022, 2023, 2024])]
    seasons: Vec<i32>,
    /// Season in progress.
    #[arg(long, default_value_t = 2025)]
    current: i32,
    /// Rounds already played in the current season.
    #[arg(long, default_value_t = 20)]
    played: u32,
    /// Write pregame win percentages instead of leaving them to be derived.
    #[arg(long)]
    explicit_win_pct: bool,
    /// Also write the current season's remaining schedule.
    #[arg(long)]
    with_schedule: bool,
}

/// Writes `league.csv`, `games.csv`, optionally `schedule.csv`, and a
/// `pennant.toml` pointing at them.
pub fn run(s: &Settings, args: &GenerateArgs) -> Result<Outcome> {
    let league = load_league(s)?;
    if args.played == 0 || args.played > league.season_length {
        return Err(UsageError::new(format!(
            "--played must be between 1 and {}",
            league.season_length
        ))
        .into());
    }
    let mut spec = LeagueLogSpec::new(league.clone(), args.seasons.clone(), s.seed);
    spec.current = Some((args.current, args.played));
    spec.explicit_win_pct = args.explicit_win_pct;
    let rows = league_game_log(&spec).map_err(|e| UsageError::new(e.to_string()))?;

    s.create_out_dir()?;
    league.write_csv(create(&s.out_file("league.csv"))?)?;
    write_game_log(&rows, create(&s.out_file("games.csv"))?)?;
    let mut config = create(&s.out_file("pennant.toml"))?;
    writeln!(
        config,
        "game_log = \"games.csv\"\nleague = \"league.csv\"\nout = \"results\"\nseed = {}",
        s.seed
    )?;
    if args.with_schedule {
        let last = rows
            .iter()
            .filter(|r| r.season() == args.current)
            .map(|r| r.date)
            .max()
            .expect("current season has games");
        let remaining = (league.season_length - args.played) as usize;
        let schedule = synthetic_schedule(
            &league,
            args.played as usize,
            remaining,
            last + chrono::Days::new(1),
            derive_seed(s.seed, args.current as u64),
        )?;
        schedule.write_csv(create(&s.out_file("schedule.csv"))?)?;
        writeln!(config, "schedule = \"schedule.csv\"")?;
    }
    config.flush()?;
    println!(
        "wrote {} games for {} teams to {}",
        rows.len(),
        league.teams().len(),
        s.out.display()
    );
    Ok(Outcome::Clean)
}
