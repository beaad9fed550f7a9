//! File-based game-log ingestion.
//!
//! Two input shapes are accepted:
//!
//! * precomputed: `date,home,away,home_won,home_winpct_pre,away_winpct_pre,home_avg_pre,away_avg_pre,home_era_pre,away_era_pre`
//! * raw: the win-percentage columns are omitted and the outcome may be given
//!   as `home_runs,away_runs` instead of `home_won`; pregame win percentages
//!   are then derived from earlier rows of the same season.
//!
//! Columns may appear in any order. Dates are `YYYY-MM-DD`; a season is the
//! calendar year of its dates.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, NaiveDate};

use crate::error::{Error, Result};
use crate::model::{GameRecord, TeamId, TeamStats};

/// One validated line of a game log. `row` is the 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct RawGameRow {
    pub row: usize,
    pub date: NaiveDate,
    pub home: TeamId,
    pub away: TeamId,
    pub home_won: bool,
    pub runs: Option<(u32, u32)>,
    pub winpct_pre: Option<(f64, f64)>,
    pub home_avg_pre: f64,
    pub away_avg_pre: f64,
    pub home_era_pre: f64,
    pub away_era_pre: f64,
}

impl RawGameRow {
    pub fn season(&self) -> i32 {
        self.date.year()
    }
}

struct Columns {
    date: usize,
    home: usize,
    away: usize,
    home_won: Option<usize>,
    runs: Option<(usize, usize)>,
    winpct: Option<(usize, usize)>,
    avg: (usize, usize),
    era: (usize, usize),
}

fn is_team_code(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "t" | "yes" | "w" => Some(true),
        "0" | "false" | "f" | "no" | "l" => Some(false),
        _ => None,
    }
}

/// Parses and validates a game log.
///
/// When `known_teams` is given, any other team code is an error.
pub fn parse_game_log<R: Read>(
    reader: R,
    source_name: &str,
    known_teams: Option<&BTreeSet<TeamId>>,
) -> Result<Vec<RawGameRow>> {
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
    let find = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| find(name).ok_or_else(|| perr(1, name, "missing column".into()));
    let pair = |a: &str, b: &str| -> Result<Option<(usize, usize)>> {
        match (find(a), find(b)) {
            (Some(x), Some(y)) => Ok(Some((x, y))),
            (None, None) => Ok(None),
            (None, Some(_)) => Err(perr(1, a, format!("column required alongside `{b}`"))),
            (Some(_), None) => Err(perr(1, b, format!("column required alongside `{a}`"))),
        }
    };
    let cols = Columns {
        date: need("date")?,
        home: need("home")?,
        away: need("away")?,
        home_won: find("home_won"),
        runs: pair("home_runs", "away_runs")?,
        winpct: pair("home_winpct_pre", "away_winpct_pre")?,
        avg: (need("home_avg_pre")?, need("away_avg_pre")?),
        era: (need("home_era_pre")?, need("away_era_pre")?),
    };
    if cols.home_won.is_none() && cols.runs.is_none() {
        return Err(perr(
            1,
            "home_won",
            "missing outcome: need `home_won` or `home_runs,away_runs`".into(),
        ));
    }

    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let field = |idx: usize, name: &str| {
            rec.get(idx)
                .ok_or_else(|| perr(row, name, "missing value".into()))
        };
        let number = |idx: usize, name: &str| -> Result<f64> {
            let raw = field(idx, name)?;
            let v: f64 = raw
                .parse()
                .map_err(|_| perr(row, name, format!("`{raw}` is not a number")))?;
            if !v.is_finite() || v < 0.0 {
                return Err(perr(
                    row,
                    name,
                    format!("`{raw}` must be finite and nonnegative"),
                ));
            }
            Ok(v)
        };
        let fraction = |idx: usize, name: &str| -> Result<f64> {
            let v = number(idx, name)?;
            if v > 1.0 {
                return Err(perr(row, name, format!("{v} exceeds 1")));
            }
            Ok(v)
        };
        let team = |idx: usize, name: &str| -> Result<TeamId> {
            let code = field(idx, name)?;
            if !is_team_code(code) {
                return Err(perr(
                    row,
                    name,
                    format!("`{code}` is not a valid team code"),
                ));
            }
            let id = TeamId::new(code);
            if let Some(known) = known_teams {
                if !known.contains(&id) {
                    return Err(perr(row, name, format!("unknown team `{code}`")));
                }
            }
            Ok(id)
        };

        let raw_date = field(cols.date, "date")?;
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| {
            perr(
                row,
                "date",
                format!("`{raw_date}` is not a YYYY-MM-DD date"),
            )
        })?;
        let home = team(cols.home, "home")?;
        let away = team(cols.away, "away")?;
        if home == away {
            return Err(perr(
                row,
                "away",
                format!("team `{home}` cannot play itself"),
            ));
        }

        let runs = match cols.runs {
            Some((h, a)) => {
                let parse = |idx, name| -> Result<u32> {
                    let raw = field(idx, name)?;
                    raw.parse()
                        .map_err(|_| perr(row, name, format!("`{raw}` is not a run count")))
                };
                let (hr, ar) = (parse(h, "home_runs")?, parse(a, "away_runs")?);
                if hr == ar {
                    return Err(perr(row, "away_runs", format!("tied score {hr}-{ar}")));
                }
                Some((hr, ar))
            }
            None => None,
        };
        let flag =
            match cols.home_won {
                Some(idx) => {
                    let raw = field(idx, "home_won")?;
                    Some(parse_bool(raw).ok_or_else(|| {
                        perr(row, "home_won", format!("`{raw}` is not a boolean"))
                    })?)
                }
                None => None,
            };
        let home_won = match (flag, runs) {
            (Some(f), Some((hr, ar))) if f != (hr > ar) => {
                return Err(perr(
                    row,
                    "home_won",
                    format!("contradicts score {hr}-{ar}"),
                ));
            }
            (Some(f), _) => f,
            (None, Some((hr, ar))) => hr > ar,
            (None, None) => unreachable!("outcome column presence checked above"),
        };
        let winpct_pre = match cols.winpct {
            Some((h, a)) => Some((
                fraction(h, "home_winpct_pre")?,
                fraction(a, "away_winpct_pre")?,
            )),
            None => None,
        };

        rows.push(RawGameRow {
            row,
            date,
            home,
            away,
            home_won,
            runs,
            winpct_pre,
            home_avg_pre: fraction(cols.avg.0, "home_avg_pre")?,
            away_avg_pre: fraction(cols.avg.1, "away_avg_pre")?,
            home_era_pre: number(cols.era.0, "home_era_pre")?,
            away_era_pre: number(cols.era.1, "away_era_pre")?,
        });
    }
    Ok(rows)
}

pub fn read_game_log(
    path: &Path,
    known_teams: Option<&BTreeSet<TeamId>>,
) -> Result<Vec<RawGameRow>> {
    let file = File::open(path).map_err(|source| Error::File {
        path: path.to_owned(),
        source,
    })?;
    parse_game_log(file, &path.display().to_string(), known_teams)
}

/// Writes rows in the column layout implied by their optional fields.
pub fn write_game_log<W: Write>(rows: &[RawGameRow], w: W) -> Result<()> {
    let with_runs = rows.iter().any(|r| r.runs.is_some());
    let with_winpct = rows.iter().any(|r| r.winpct_pre.is_some());
    if rows
        .iter()
        .any(|r| r.runs.is_some() != with_runs || r.winpct_pre.is_some() != with_winpct)
    {
        return Err(Error::mismatch(
            "rows mix optional columns; cannot write a single table",
        ));
    }
    let mut header = vec!["date", "home", "away", "home_won"];
    if with_runs {
        header.extend(["home_runs", "away_runs"]);
    }
    if with_winpct {
        header.extend(["home_winpct_pre", "away_winpct_pre"]);
    }
    header.extend([
        "home_avg_pre",
        "away_avg_pre",
        "home_era_pre",
        "away_era_pre",
    ]);

    let mut out = csv::Writer::from_writer(w);
    out.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            r.date.format("%Y-%m-%d").to_string(),
            r.home.to_string(),
            r.away.to_string(),
            u8::from(r.home_won).to_string(),
        ];
        if let Some((h, a)) = r.runs {
            rec.extend([h.to_string(), a.to_string()]);
        }
        if let Some((h, a)) = r.winpct_pre {
            rec.extend([h.to_string(), a.to_string()]);
        }
        rec.extend(
            [
                r.home_avg_pre,
                r.away_avg_pre,
                r.home_era_pre,
                r.away_era_pre,
            ]
            .map(|v| v.to_string()),
        );
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}

/// Running win/loss record of one team within a season.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Record {
    pub wins: u32,
    pub losses: u32,
}

impl Record {
    pub fn played(&self) -> u32 {
        self.wins + self.losses
    }

    pub fn win_pct(&self) -> Option<f64> {
        (self.played() > 0).then(|| self.wins as f64 / self.played() as f64)
    }
}

/// Win percentage assigned to a team with no prior games in the season.
pub const DEFAULT_WIN_PCT: f64 = 0.5;

/// Turns chronologically sorted rows into model records.
///
/// Explicit pregame win percentages are used when present; otherwise they are
/// computed from earlier rows of the same season, with [`DEFAULT_WIN_PCT`]
/// (and `winpct_defaulted`) for a team's first game.
pub fn derive_pregame_records(rows: &[RawGameRow]) -> Result<Vec<GameRecord>> {
    if let Some(w) = rows.windows(2).find(|w| w[1].date < w[0].date) {
        return Err(Error::mismatch(format!(
            "game log is not sorted by date: row {} ({}) follows row {} ({})",
            w[1].row, w[1].date, w[0].row, w[0].date
        )));
    }
    let mut standings: HashMap<(i32, TeamId), Record> = HashMap::new();
    let mut out = Vec::with_capacity(rows.len());
    for r in rows {
        let season = r.season();
        let home_rec = standings
            .get(&(season, r.home.clone()))
            .copied()
            .unwrap_or_default();
        let away_rec = standings
            .get(&(season, r.away.clone()))
            .copied()
            .unwrap_or_default();
        let (home_pct, away_pct, defaulted) = match r.winpct_pre {
            Some((h, a)) => (h, a, false),
            None => (
                home_rec.win_pct().unwrap_or(DEFAULT_WIN_PCT),
                away_rec.win_pct().unwrap_or(DEFAULT_WIN_PCT),
                home_rec.played() == 0 || away_rec.played() == 0,
            ),
        };
        out.push(GameRecord {
            date: r.date,
            home_team: r.home.clone(),
            away_team: r.away.clone(),
            home: TeamStats {
                win_pct: home_pct,
                batting_avg: r.home_avg_pre,
                starter_era: r.home_era_pre,
            },
            away: TeamStats {
                win_pct: away_pct,
                batting_avg: r.away_avg_pre,
                starter_era: r.away_era_pre,
            },
            home_won: r.home_won,
            home_played: home_rec.played(),
            away_played: away_rec.played(),
            winpct_defaulted: defaulted,
        });
        let (winner, loser) = if r.home_won {
            (&r.home, &r.away)
        } else {
            (&r.away, &r.home)
        };
        standings.entry((season, winner.clone())).or_default().wins += 1;
        standings.entry((season, loser.clone())).or_default().losses += 1;
    }
    Ok(out)
}

/// Month and day, ordered within a calendar year.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct MonthDay {
    pub month: u32,
    pub day: u32,
}

impl MonthDay {
    pub fn new(month: u32, day: u32) -> Result<Self> {
        // 2024 is a leap year, so Feb 29 is accepted.
        NaiveDate::from_ymd_opt(2024, month, day)
            .ok_or_else(|| Error::config(format!("invalid month-day {month:02}-{day:02}")))?;
        Ok(MonthDay { month, day })
    }

    pub fn of(date: NaiveDate) -> Self {
        MonthDay {
            month: date.month(),
            day: date.day(),
        }
    }
}

impl FromStr for MonthDay {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (m, d) = s
            .split_once('-')
            .ok_or_else(|| Error::config(format!("expected MM-DD, got `{s}`")))?;
        let parse = |x: &str| {
            x.parse::<u32>()
                .map_err(|_| Error::config(format!("expected MM-DD, got `{s}`")))
        };
        MonthDay::new(parse(m)?, parse(d)?)
    }
}

impl fmt::Display for MonthDay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:02}-{:02}", self.month, self.day)
    }
}

/// Which training records to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DatasetFilter {
    pub start: MonthDay,
    pub end: MonthDay,
    pub min_games_played: u32,
}

impl DatasetFilter {
    /// Mid-season window, May 20 to Aug 20 inclusive.
    pub fn date_window() -> Self {
        DatasetFilter {
            start: MonthDay { month: 5, day: 20 },
            end: MonthDay { month: 8, day: 20 },
            min_games_played: 0,
        }
    }

    /// Whole season, but only once both teams have played 50 games.
    pub fn games_played() -> Self {
        DatasetFilter {
            start: MonthDay { month: 1, day: 1 },
            end: MonthDay { month: 12, day: 31 },
            min_games_played: 50,
        }
    }

    /// Keeps everything.
    pub fn none() -> Self {
        DatasetFilter {
            start: MonthDay { month: 1, day: 1 },
            end: MonthDay { month: 12, day: 31 },
            min_games_played: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.start > self.end {
            return Err(Error::config(format!(
                "filter start {} is after end {}",
                self.start, self.end
            )));
        }
        Ok(())
    }

    pub fn keeps(&self, r: &GameRecord) -> bool {
        let md = MonthDay::of(r.date);
        self.start <= md
            && md <= self.end
            && r.home_played >= self.min_games_played
            && r.away_played >= self.min_games_played
    }
}

/// Order-preserving filter on date window and games played.
pub fn filter_training_window(records: &[GameRecord], filter: &DatasetFilter) -> Vec<GameRecord> {
    records
        .iter()
        .filter(|r| filter.keeps(r))
        .cloned()
        .collect()
}

/// Per-team, per-season sequences of a pregame covariate, in game order.
pub fn team_series(rows: &[RawGameRow], covariate: Covariate) -> BTreeMap<(i32, TeamId), Vec<f64>> {
    let mut out: BTreeMap<(i32, TeamId), Vec<f64>> = BTreeMap::new();
    for r in rows {
        let (h, a) = match covariate {
            Covariate::StarterEra => (r.home_era_pre, r.away_era_pre),
            Covariate::BattingAvg => (r.home_avg_pre, r.away_avg_pre),
        };
        out.entry((r.season(), r.home.clone())).or_default().push(h);
        out.entry((r.season(), r.away.clone())).or_default().push(a);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Covariate {
    StarterEra,
    BattingAvg,
}

/// Final records per team in the given rows.
pub fn standings(rows: &[RawGameRow]) -> BTreeMap<TeamId, Record> {
    let mut table: BTreeMap<TeamId, Record> = BTreeMap::new();
    for r in rows {
        let (winner, loser) = if r.home_won {
            (&r.home, &r.away)
        } else {
            (&r.away, &r.home)
        };
        table.entry(winner.clone()).or_default().wins += 1;
        table.entry(loser.clone()).or_default().losses += 1;
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    const PRECOMPUTED: &str = "date,home,away,home_won,home_winpct_pre,away_winpct_pre,home_avg_pre,away_avg_pre,home_era_pre,away_era_pre\n";

    #[test]
    fn empty_file_with_header() {
        assert!(parse_game_log(PRECOMPUTED.as_bytes(), "t", None)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn bad_era_names_row_and_column() {
        let text = format!("{PRECOMPUTED}2024-06-01,LAD,SDP,1,0.6,0.5,0.25,0.24,3.1,4.0\n2024-06-02,LAD,SDP,0,0.6,0.5,0.25,0.24,abc,4.0\n");
        let err = parse_game_log(text.as_bytes(), "t.csv", None).unwrap_err();
        match err {
            Error::Parse { row, column, .. } => {
                assert_eq!(row, 3);
                assert_eq!(column, "home_era_pre");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_column_and_unknown_team() {
        let text = "date,home,away,home_won,home_avg_pre,away_avg_pre,home_era_pre\n";
        assert!(
            matches!(parse_game_log(text.as_bytes(), "t", None), Err(Error::Parse { ref column, .. }) if column == "away_era_pre")
        );

        let known: BTreeSet<TeamId> = ["LAD".into()].into();
        let text = format!("{PRECOMPUTED}2024-06-01,LAD,SDP,1,0.6,0.5,0.25,0.24,3.1,4.0\n");
        let err = parse_game_log(text.as_bytes(), "t", Some(&known)).unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, ref column, .. } if column == "away"));
    }

    #[test]
    fn raw_mode_with_runs() {
        let text = "date,home,away,home_runs,away_runs,home_avg_pre,away_avg_pre,home_era_pre,away_era_pre\n\
                    2024-04-01,NYM,ATL,5,3,0.25,0.26,3.0,4.0\n\
                    2024-04-02,NYM,ATL,1,2,0.25,0.26,3.0,4.0\n";
        let rows = parse_game_log(text.as_bytes(), "t", None).unwrap();
        assert!(rows[0].home_won);
        assert!(!rows[1].home_won);
        assert_eq!(rows[1].runs, Some((1, 2)));
    }

    #[test]
    fn contradictory_outcome_is_rejected() {
        let text = "date,home,away,home_won,home_runs,away_runs,home_avg_pre,away_avg_pre,home_era_pre,away_era_pre\n\
                    2024-04-01,NYM,ATL,0,5,3,0.25,0.26,3.0,4.0\n";
        assert!(parse_game_log(text.as_bytes(), "t", None).is_err());
    }

    fn raw(date: &str, home: &str, away: &str, home_won: bool) -> RawGameRow {
        RawGameRow {
            row: 0,
            date: date.parse().unwrap(),
            home: home.into(),
            away: away.into(),
            home_won,
            runs: None,
            winpct_pre: None,
            home_avg_pre: 0.25,
            away_avg_pre: 0.25,
            home_era_pre: 4.0,
            away_era_pre: 4.0,
        }
    }

    #[test]
    fn derived_win_pct_after_25_15() {
        let mut rows = Vec::new();
        let start = NaiveDate::from_ymd_opt(2024, 4, 1).unwrap();
        for i in 0..40 {
            let d = (start + chrono::Days::new(i)).to_string();
            rows.push(raw(&d, "AAA", "BBB", i < 25));
        }
        rows.push(raw("2024-05-20", "AAA", "CCC", true));
        let recs = derive_pregame_records(&rows).unwrap();
        let last = recs.last().unwrap();
        assert_eq!(last.home.win_pct, 0.625);
        assert_eq!(last.home_played, 40);
        assert_eq!(last.away.win_pct, DEFAULT_WIN_PCT);
        assert!(last.winpct_defaulted);
        assert!(recs[0].winpct_defaulted);
        assert!(!recs[1].winpct_defaulted);
    }

    #[test]
    fn seasons_reset_standings() {
        let rows = vec![
            raw("2023-09-30", "AAA", "BBB", true),
            raw("2024-03-30", "AAA", "BBB", true),
        ];
        let recs = derive_pregame_records(&rows).unwrap();
        assert_eq!(recs[1].home_played, 0);
        assert_eq!(recs[1].home.win_pct, 0.5);
    }

    #[test]
    fn unsorted_rows_error() {
        let rows = vec![
            raw("2024-05-02", "AAA", "BBB", true),
            raw("2024-05-01", "AAA", "BBB", true),
        ];
        assert!(matches!(
            derive_pregame_records(&rows),
            Err(Error::Mismatch(_))
        ));
    }

    #[test]
    fn date_window_is_inclusive() {
        let rows = vec![
            raw("2024-05-19", "AAA", "BBB", true),
            raw("2024-05-20", "AAA", "BBB", true),
            raw("2024-08-20", "AAA", "BBB", true),
            raw("2024-08-21", "AAA", "BBB", true),
        ];
        let recs = derive_pregame_records(&rows).unwrap();
        let kept = filter_training_window(&recs, &DatasetFilter::date_window());
        let dates: Vec<String> = kept.iter().map(|r| r.date.to_string()).collect();
        assert_eq!(dates, ["2024-05-20", "2024-08-20"]);
        assert!(filter_training_window(&[], &DatasetFilter::date_window()).is_empty());
    }

    #[test]
    fn games_played_mode_drops_early_rows() {
        let start = NaiveDate::from_ymd_opt(2024, 4, 1).unwrap();
        let rows: Vec<RawGameRow> = (0..60)
            .map(|i| {
                raw(
                    &(start + chrono::Days::new(i)).to_string(),
                    "AAA",
                    "BBB",
                    i % 2 == 0,
                )
            })
            .collect();
        let recs = derive_pregame_records(&rows).unwrap();
        let kept = filter_training_window(&recs, &DatasetFilter::games_played());
        assert_eq!(kept.len(), 10);
        assert!(kept
            .iter()
            .all(|r| r.home_played >= 50 && r.away_played >= 50));
    }

    #[test]
    fn month_day_parsing() {
        assert_eq!(
            "05-20".parse::<MonthDay>().unwrap(),
            MonthDay { month: 5, day: 20 }
        );
        assert!("13-01".parse::<MonthDay>().is_err());
        assert!("0520".parse::<MonthDay>().is_err());
        assert_eq!(MonthDay { month: 8, day: 2 }.to_string(), "08-02");
    }
}
