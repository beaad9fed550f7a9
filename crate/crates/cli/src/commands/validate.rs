use anyhow::Result;
use pennant_core::ingest::{derive_pregame_records, read_game_log, standings};
use pennant_core::season::Schedule;
use pennant_core::LeagueStructure;

use crate::config::Settings;
use crate::data::SeasonSplit;
use crate::Outcome;

/// Every problem found in the configured inputs.
pub fn collect_issues(s: &Settings) -> Vec<String> {
    let mut issues = Vec::new();
    let league = match &s.league {
        Some(p) if !p.is_file() => {
            issues.push(format!("league file {} does not exist", p.display()));
            None
        }
        Some(p) => match LeagueStructure::read(p, s.season_length) {
            Ok(l) => Some(l),
            Err(e) => {
                issues.push(e.to_string());
                None
            }
        },
        None => Some(LeagueStructure::mlb()),
    };
    if let Some(l) = &league {
        issues.extend(l.issues());
    }

    let known = league.as_ref().map(LeagueStructure::team_set);
    let rows = match &s.game_log {
        None => {
            issues.push("no game log configured".to_owned());
            None
        }
        Some(p) if !p.is_file() => {
            issues.push(format!("game log {} does not exist", p.display()));
            None
        }
        Some(p) => match read_game_log(p, known.as_ref()) {
            Ok(rows) if rows.is_empty() => {
                issues.push(format!("game log {} has no games", p.display()));
                None
            }
            Ok(rows) => Some(rows),
            Err(e) => {
                issues.push(e.to_string());
                None
            }
        },
    };
    if let Some(rows) = &rows {
        if let Err(e) = derive_pregame_records(rows) {
            issues.push(e.to_string());
        }
    }

    if let Some(p) = &s.schedule {
        match Schedule::read(p) {
            Ok(schedule) => {
                if let (Some(l), Some(rows)) = (&league, &rows) {
                    let split = SeasonSplit::new(rows.clone());
                    let played = standings(&split.current)
                        .into_iter()
                        .map(|(t, r)| (t, r.played()))
                        .collect();
                    issues.extend(schedule.issues(l, Some(&played)));
                } else if let Some(l) = &league {
                    issues.extend(schedule.issues(l, None));
                }
            }
            Err(e) => issues.push(e.to_string()),
        }
    }
    issues
}

pub fn run(s: &Settings) -> Result<Outcome> {
    let issues = collect_issues(s);
    if issues.is_empty() {
        println!("no issues found");
        return Ok(Outcome::Clean);
    }
    for i in &issues {
        println!("issue: {i}");
    }
    println!("{} issue(s) found", issues.len());
    Ok(Outcome::Flagged)
}
