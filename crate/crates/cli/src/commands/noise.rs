use std::io::Write;

use anyhow::Result;
use log::{info, warn};
use pennant_core::batting::estimate_pooled_step_std;
use pennant_core::era::{sliding_noise_estimates, write_pool_csv, PooledEstimate, Tercile};
use pennant_core::ingest::{team_series, Covariate};
use pennant_core::stats;

use crate::config::Settings;
use crate::data::{
    create, load_league, load_rows, season_terciles, write_meta, InvalidInput, SeasonSplit,
};
use crate::Outcome;

pub fn run(s: &Settings) -> Result<Outcome> {
    let log_path = s.require_game_log()?;
    let league = load_league(s)?;
    let split = SeasonSplit::new(load_rows(log_path, &league)?);
    let all: Vec<_> = split
        .history
        .iter()
        .chain(&split.current)
        .cloned()
        .collect();
    let terciles = season_terciles(&all)?;

    let mut pooled = Vec::new();
    let mut skipped = 0usize;
    for ((season, team), series) in team_series(split.training(), Covariate::StarterEra) {
        if series.len() < s.window_length {
            warn!(
                "{team} {season}: {} ERA values, fewer than the {}-game window; skipped",
                series.len(),
                s.window_length
            );
            skipped += 1;
            continue;
        }
        let tercile = terciles[&season]
            .0
            .tercile_of(&team)
            .expect("every team in a season is grouped");
        for estimate in sliding_noise_estimates(&team, &series, s.window_length)? {
            pooled.push(PooledEstimate {
                estimate,
                season,
                tercile,
            });
        }
    }
    if pooled.is_empty() {
        return Err(InvalidInput(format!(
            "no team has an ERA series of at least {} games",
            s.window_length
        ))
        .into());
    }
    let windows = pooled.len();
    pooled.retain(|p| p.estimate.converged && !p.estimate.degenerate);
    info!("{} of {windows} window fits converged", pooled.len());

    let batting: Vec<Vec<f64>> = team_series(split.training(), Covariate::BattingAvg)
        .into_values()
        .collect();
    let batting_step = estimate_pooled_step_std(&batting)?;

    s.create_out_dir()?;
    write_pool_csv(&pooled, create(&s.out_file("noise_pool.csv"))?)?;
    let mut tf = create(&s.out_file("terciles.csv"))?;
    writeln!(tf, "season,team,early_era,tercile")?;
    for (season, (grouping, eras)) in &terciles {
        for (team, t) in grouping.assignments() {
            writeln!(tf, "{season},{team},{},{t}", eras[team])?;
        }
    }
    tf.flush()?;

    let mut meta = vec![
        ("window_length", s.window_length.to_string()),
        ("windows_fitted", windows.to_string()),
        ("windows_pooled", pooled.len().to_string()),
        ("team_seasons_skipped", skipped.to_string()),
        ("batting_step_std", batting_step.to_string()),
    ];
    println!("tercile   windows  median sigma_obs  median sigma_process");
    for (t, key) in Tercile::ALL
        .into_iter()
        .zip(["pooled_low", "pooled_medium", "pooled_high"])
    {
        let group: Vec<_> = pooled
            .iter()
            .filter(|p| p.tercile == t)
            .map(|p| p.estimate.params)
            .collect();
        meta.push((key, group.len().to_string()));
        if group.is_empty() {
            warn!("the {t} tercile has no converged window fits");
            println!("{t:<8} {:>8}", 0);
            continue;
        }
        let med = |f: fn(&pennant_core::era::NoiseParams) -> f64| {
            stats::quantiles(&group.iter().map(f).collect::<Vec<_>>(), &[0.5])[0]
        };
        println!(
            "{t:<8} {:>8} {:>17.4} {:>21.4}",
            group.len(),
            med(|p| p.sigma_obs),
            med(|p| p.sigma_process)
        );
    }
    write_meta(&s.out_file("noise_meta.txt"), &meta)?;
    println!("pooled batting step std {batting_step:.5}");
    Ok(Outcome::Clean)
}
