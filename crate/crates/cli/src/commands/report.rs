use std::fs::File;

use anyhow::{Context, Result};
use pennant_core::season::{
    export_win_histogram, read_results_csv, summarize, ForecastSummary, SeasonResult,
};
use pennant_core::TeamId;

use crate::config::Settings;
use crate::data::create;
use crate::{Outcome, UsageError};

pub const RESULTS_FILE: &str = "wins.csv";

pub fn run(s: &Settings, histograms: &[String]) -> Result<Outcome> {
    let path = s.out_file(RESULTS_FILE);
    if !path.is_file() {
        return Err(UsageError::new(format!(
            "{} not found; run `pennant simulate` first",
            path.display()
        ))
        .into());
    }
    let file = File::open(&path).with_context(|| format!("opening {}", path.display()))?;
    let results = read_results_csv(file, &path.display().to_string())?;
    let teams = check_histogram_teams(&results, histograms)?;
    let summary = write_summary(s, &results, &teams)?;
    print!("{}", summary.to_table());
    Ok(Outcome::Clean)
}

/// Histogram requests as team ids, rejecting any team without results.
pub fn check_histogram_teams(
    results: &[SeasonResult],
    requested: &[String],
) -> Result<Vec<TeamId>> {
    let known = results.first().map(|r| &r.wins);
    requested
        .iter()
        .map(|t| {
            let id = TeamId::new(t.as_str());
            match known {
                Some(w) if w.contains_key(&id) => Ok(id),
                _ => Err(UsageError::new(format!("no simulated results for team `{t}`")).into()),
            }
        })
        .collect()
}

/// Writes `summary.csv` and one `hist_<TEAM>.csv` per requested team.
pub fn write_summary(
    s: &Settings,
    results: &[SeasonResult],
    histograms: &[TeamId],
) -> Result<ForecastSummary> {
    let summary = summarize(results)?;
    summary.write_csv(create(&s.out_file("summary.csv"))?)?;
    for team in histograms {
        export_win_histogram(results, team)?
            .write_csv(create(&s.out_file(&format!("hist_{team}.csv")))?)?;
    }
    Ok(summary)
}
