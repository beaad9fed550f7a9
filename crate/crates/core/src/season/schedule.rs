use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::seq::SliceRandom;

use super::league::LeagueStructure;
use crate::error::{Error, Result};
use crate::model::TeamId;
use crate::rng;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScheduledGame {
    pub date: NaiveDate,
    pub home: TeamId,
    pub away: TeamId,
}

/// Unplayed games, kept in date order (file order within a date).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Schedule {
    pub games: Vec<ScheduledGame>,
    /// True when generated rather than read from a file.
    pub synthetic: bool,
}

impl Schedule {
    pub fn new(mut games: Vec<ScheduledGame>) -> Self {
        games.sort_by_key(|g| g.date);
        Schedule {
            games,
            synthetic: false,
        }
    }

    pub fn len(&self) -> usize {
        self.games.len()
    }

    pub fn is_empty(&self) -> bool {
        self.games.is_empty()
    }

    pub fn games_per_team(&self) -> BTreeMap<TeamId, u32> {
        let mut counts = BTreeMap::new();
        for g in &self.games {
            *counts.entry(g.home.clone()).or_insert(0) += 1;
            *counts.entry(g.away.clone()).or_insert(0) += 1;
        }
        counts
    }

    pub fn parse<R: Read>(reader: R, source_name: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let perr = |row: usize, column: &str, message: String| Error::Parse {
            source_name: source_name.to_owned(),
            row,
            column: column.to_owned(),
            message,
        };
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| perr(1, name, "missing column".into()))
        };
        let (dc, hc, ac) = (col("date")?, col("home")?, col("away")?);
        let mut games = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let row = i + 2;
            let raw = rec.get(dc).unwrap_or("");
            let date = NaiveDate::parse_from_str(raw, "%Y-%m-%d")
                .map_err(|_| perr(row, "date", format!("`{raw}` is not a YYYY-MM-DD date")))?;
            let team = |c: usize, name: &str| match rec.get(c) {
                Some(v) if !v.is_empty() => Ok(TeamId::new(v)),
                _ => Err(perr(row, name, "missing value".into())),
            };
            let (home, away) = (team(hc, "home")?, team(ac, "away")?);
            if home == away {
                return Err(perr(
                    row,
                    "away",
                    format!("team `{home}` cannot play itself"),
                ));
            }
            games.push(ScheduledGame { date, home, away });
        }
        Ok(Schedule::new(games))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::File {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(file, &path.display().to_string())
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["date", "home", "away"])?;
        for g in &self.games {
            out.write_record([
                g.date.format("%Y-%m-%d").to_string(),
                g.home.to_string(),
                g.away.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Consistency problems against a league and the games already played.
    ///
    /// With `played` given, every team's played plus scheduled games must equal
    /// the season length.
    pub fn issues(
        &self,
        league: &LeagueStructure,
        played: Option<&BTreeMap<TeamId, u32>>,
    ) -> Vec<String> {
        let teams = league.team_set();
        let mut issues = Vec::new();
        for (i, g) in self.games.iter().enumerate() {
            for t in [&g.home, &g.away] {
                if !teams.contains(t) {
                    issues.push(format!(
                        "schedule game {} ({}): team {t} is not in the league structure",
                        i + 1,
                        g.date
                    ));
                }
            }
        }
        if let Some(played) = played {
            let scheduled = self.games_per_team();
            for t in &teams {
                let total =
                    played.get(t).copied().unwrap_or(0) + scheduled.get(t).copied().unwrap_or(0);
                if total != league.season_length {
                    issues.push(format!(
                        "team {t}: {total} games played plus scheduled, expected {}",
                        league.season_length
                    ));
                }
            }
        }
        issues
    }
}

/// Pairs every team with one opponent; `n` must be even. Circle method.
fn circle_round<T: Clone>(teams: &[T], round: usize) -> Vec<(T, T)> {
    let n = teams.len();
    debug_assert!(n.is_multiple_of(2));
    if n == 0 {
        return Vec::new();
    }
    let k = round % (n - 1).max(1);
    let mut ring: Vec<T> = Vec::with_capacity(n);
    ring.push(teams[0].clone());
    ring.extend((0..n - 1).map(|i| teams[1 + (i + k) % (n - 1)].clone()));
    (0..n / 2)
        .map(|i| (ring[i].clone(), ring[n - 1 - i].clone()))
        .collect()
}

/// A division-heavy round: circle pairing inside each division, with the
/// teams left over by odd-sized divisions paired with each other.
fn division_round(divisions: &[Vec<usize>], round: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    let mut byes = Vec::new();
    for div in divisions {
        let mut slots: Vec<Option<usize>> = div.iter().copied().map(Some).collect();
        if slots.len() % 2 == 1 {
            slots.push(None);
        }
        for (a, b) in circle_round(&slots, round) {
            match (a, b) {
                (Some(a), Some(b)) => pairs.push((a, b)),
                (Some(t), None) | (None, Some(t)) => byes.push(t),
                (None, None) => {}
            }
        }
    }
    let b = byes.len();
    if b > 0 {
        byes.rotate_left(round % b);
    }
    pairs.extend(circle_round(&byes, round / b.max(1)));
    pairs
}

/// Generates `n_rounds` rounds starting at round `first_round` of a balanced
/// synthetic season in which every team plays exactly once per round.
///
/// Three rounds in five pair teams within their divisions as far as division
/// sizes allow; the others use a league-wide circle rotation. Round `k` is
/// dated `start + (k - first_round)` days.
pub fn synthetic_schedule(
    league: &LeagueStructure,
    first_round: usize,
    n_rounds: usize,
    start: NaiveDate,
    seed: u64,
) -> Result<Schedule> {
    league.validate()?;
    let mut order = league.teams();
    if order.len() % 2 == 1 {
        return Err(Error::config(format!(
            "a balanced schedule needs an even number of teams, got {}",
            order.len()
        )));
    }
    order.shuffle(&mut rng::stream(seed, rng::tags::SCHEDULE));
    let pos: HashMap<&TeamId, usize> = order.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let divisions: Vec<Vec<usize>> = league
        .leagues
        .iter()
        .flat_map(|l| l.divisions.iter())
        .map(|d| {
            let mut v: Vec<usize> = d.teams.iter().map(|t| pos[t]).collect();
            v.sort_unstable();
            v
        })
        .collect();
    let all: Vec<usize> = (0..order.len()).collect();

    let (mut div_rounds, mut gen_rounds) = (0usize, 0usize);
    let mut games = Vec::with_capacity(n_rounds * order.len() / 2);
    for k in 0..first_round + n_rounds {
        let pairs = if k * 3 % 5 < 3 {
            div_rounds += 1;
            division_round(&divisions, div_rounds - 1)
        } else {
            gen_rounds += 1;
            circle_round(&all, gen_rounds - 1)
        };
        if k < first_round {
            continue;
        }
        let date = start
            .checked_add_days(Days::new((k - first_round) as u64))
            .ok_or_else(|| Error::config("schedule dates overflow"))?;
        for (j, (a, b)) in pairs.into_iter().enumerate() {
            let (h, w) = if (k + j) % 2 == 0 { (a, b) } else { (b, a) };
            games.push(ScheduledGame {
                date,
                home: order[h].clone(),
                away: order[w].clone(),
            });
        }
    }
    Ok(Schedule {
        games,
        synthetic: true,
    })
}
