use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use super::sim::SeasonResult;
use crate::error::{Error, Result};
use crate::model::TeamId;
use crate::stats::nearest_rank;

/// One team's row of the forecast table.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamForecast {
    pub team: TeamId,
    pub mean_wins: f64,
    pub ci5: u32,
    pub ci95: u32,
    /// Fraction of replications in which the team qualified.
    pub playoff_prob: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForecastSummary {
    /// Descending mean wins, ties by team code.
    pub teams: Vec<TeamForecast>,
    pub replications: usize,
}

pub const SUMMARY_HEADER: [&str; 5] = ["Team", "MeanWins", "CI5", "CI95", "PlayoffPct"];
const TABLE_HEADER: [&str; 4] = ["Team", "Mean Wins", "90% CI (5, 95)", "Playoff %"];

fn win_columns(results: &[SeasonResult]) -> Result<BTreeMap<&TeamId, Vec<u32>>> {
    let first = results
        .first()
        .ok_or_else(|| Error::insufficient("no replications to summarize"))?;
    let mut cols: BTreeMap<&TeamId, Vec<u32>> = first
        .wins
        .keys()
        .map(|t| (t, Vec::with_capacity(results.len())))
        .collect();
    for r in results {
        if r.wins.len() != cols.len() {
            return Err(Error::mismatch(format!(
                "replication {} covers a different team set",
                r.replication_id
            )));
        }
        for (t, &w) in &r.wins {
            cols.get_mut(t)
                .ok_or_else(|| {
                    Error::mismatch(format!(
                        "replication {} covers a different team set",
                        r.replication_id
                    ))
                })?
                .push(w);
        }
    }
    Ok(cols)
}

pub fn summarize(results: &[SeasonResult]) -> Result<ForecastSummary> {
    let n = results.len();
    let mut teams: Vec<TeamForecast> = win_columns(results)?
        .into_iter()
        .map(|(team, mut wins)| {
            let mean_wins = wins.iter().map(|&w| w as f64).sum::<f64>() / n as f64;
            wins.sort_unstable();
            let made = results
                .iter()
                .filter(|r| r.qualifiers.contains(team))
                .count();
            TeamForecast {
                team: team.clone(),
                mean_wins,
                ci5: nearest_rank(&wins, 0.05),
                ci95: nearest_rank(&wins, 0.95),
                playoff_prob: made as f64 / n as f64,
            }
        })
        .collect();
    teams.sort_by(|a, b| {
        b.mean_wins
            .total_cmp(&a.mean_wins)
            .then_with(|| a.team.cmp(&b.team))
    });
    Ok(ForecastSummary {
        teams,
        replications: n,
    })
}

impl ForecastSummary {
    fn rows(&self) -> Vec<[String; 5]> {
        self.teams
            .iter()
            .map(|t| {
                [
                    t.team.to_string(),
                    format!("{:.1}", t.mean_wins),
                    t.ci5.to_string(),
                    t.ci95.to_string(),
                    format!("{:.1}", 100.0 * t.playoff_prob),
                ]
            })
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(SUMMARY_HEADER)?;
        for row in self.rows() {
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }

    /// Human-readable aligned table.
    pub fn to_table(&self) -> String {
        let body: Vec<[String; 4]> = self
            .rows()
            .into_iter()
            .map(|[team, mean, lo, hi, pct]| [team, mean, format!("({lo}, {hi})"), pct])
            .collect();
        let mut widths = TABLE_HEADER.map(str::len);
        for row in &body {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: [&str; 4]| {
            let mut s = format!("{:<w$}", cells[0], w = widths[0]);
            for (i, c) in cells.iter().enumerate().skip(1) {
                s.push_str(&format!(" | {:>w$}", c, w = widths[i]));
            }
            s.trim_end().to_owned() + "\n"
        };
        let mut out = line(TABLE_HEADER);
        let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
        out.push_str(&rule.join("-+-"));
        out.push('\n');
        for row in &body {
            out.push_str(&line([&row[0], &row[1], &row[2], &row[3]]));
        }
        out
    }
}

/// Counts of simulated win totals for one team, one row per total from the
/// observed minimum to maximum.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WinHistogram {
    pub team: TeamId,
    pub bins: Vec<(u32, u32)>,
}

impl WinHistogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().map(|&(_, c)| c as u64).sum()
    }

    pub fn mean(&self) -> f64 {
        let s: f64 = self.bins.iter().map(|&(w, c)| w as f64 * c as f64).sum();
        s / self.total() as f64
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["win_total", "count"])?;
        for (w, c) in &self.bins {
            out.write_record([w.to_string(), c.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn export_win_histogram(results: &[SeasonResult], team: &TeamId) -> Result<WinHistogram> {
    if results.is_empty() {
        return Err(Error::insufficient("no replications to histogram"));
    }
    let wins: Vec<u32> = results
        .iter()
        .map(|r| {
            r.wins
                .get(team)
                .copied()
                .ok_or_else(|| Error::UnknownTeam(format!("no simulated wins for team {team}")))
        })
        .collect::<Result<_>>()?;
    let (lo, hi) = (*wins.iter().min().unwrap(), *wins.iter().max().unwrap());
    let mut counts = vec![0u32; (hi - lo + 1) as usize];
    for w in wins {
        counts[(w - lo) as usize] += 1;
    }
    Ok(WinHistogram {
        team: team.clone(),
        bins: counts
            .into_iter()
            .enumerate()
            .map(|(i, c)| (lo + i as u32, c))
            .collect(),
    })
}

const RESULTS_HEADER: [&str; 4] = ["replication", "team", "wins", "playoff"];

/// Long-format per-replication table: `replication,team,wins,playoff`.
pub fn write_results_csv<W: Write>(results: &[SeasonResult], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(RESULTS_HEADER)?;
    for r in results {
        for (t, wins) in &r.wins {
            let made = if r.qualifiers.contains(t) { "1" } else { "0" };
            out.write_record([
                r.replication_id.to_string().as_str(),
                t.as_str(),
                &wins.to_string(),
                made,
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn read_results_csv<R: Read>(reader: R, source_name: &str) -> Result<Vec<SeasonResult>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    if headers.iter().ne(RESULTS_HEADER) {
        return Err(Error::Parse {
            source_name: source_name.to_owned(),
            row: 1,
            column: "header".into(),
            message: format!("expected {}", RESULTS_HEADER.join(",")),
        });
    }
    let mut by_rep: BTreeMap<u64, (BTreeMap<TeamId, u32>, BTreeSet<TeamId>)> = BTreeMap::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let perr = |col: &str| Error::Parse {
            source_name: source_name.to_owned(),
            row: i + 2,
            column: col.to_owned(),
            message: format!(
                "invalid value `{}`",
                rec.get(RESULTS_HEADER.iter().position(|h| *h == col).unwrap())
                    .unwrap_or("")
            ),
        };
        let rep: u64 = rec
            .get(0)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| perr("replication"))?;
        let team = TeamId::new(
            rec.get(1)
                .filter(|v| !v.is_empty())
                .ok_or_else(|| perr("team"))?,
        );
        let wins: u32 = rec
            .get(2)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| perr("wins"))?;
        let made = match rec.get(3) {
            Some("1") => true,
            Some("0") => false,
            _ => return Err(perr("playoff")),
        };
        let entry = by_rep.entry(rep).or_default();
        if made {
            entry.1.insert(team.clone());
        }
        if entry.0.insert(team.clone(), wins).is_some() {
            return Err(Error::Parse {
                source_name: source_name.to_owned(),
                row: i + 2,
                column: "team".into(),
                message: format!("duplicate team {team} in replication {rep}"),
            });
        }
    }
    Ok(by_rep
        .into_iter()
        .map(|(replication_id, (wins, qualifiers))| SeasonResult {
            replication_id,
            wins,
            qualifiers,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(id: u64, wins: &[(&str, u32)], made: &[&str]) -> SeasonResult {
        SeasonResult {
            replication_id: id,
            wins: wins.iter().map(|&(t, w)| (TeamId::from(t), w)).collect(),
            qualifiers: made.iter().map(|&t| TeamId::from(t)).collect(),
        }
    }

    #[test]
    fn constant_wins_give_degenerate_interval() {
        let rs: Vec<_> = (0..10)
            .map(|i| result(i, &[("SDP", 90), ("COL", 50)], &["SDP"]))
            .collect();
        let s = summarize(&rs).unwrap();
        assert_eq!(s.teams[0].team.as_str(), "SDP");
        assert_eq!(
            (s.teams[0].mean_wins, s.teams[0].ci5, s.teams[0].ci95),
            (90.0, 90, 90)
        );
        assert_eq!(s.teams[0].playoff_prob, 1.0);
        assert_eq!(s.teams[1].playoff_prob, 0.0);
    }

    #[test]
    fn playoff_frequency_formats_to_one_decimal() {
        let rs: Vec<_> = (0..1000)
            .map(|i| result(i, &[("SDP", 90)], if i < 909 { &["SDP"] } else { &[] }))
            .collect();
        let s = summarize(&rs).unwrap();
        assert!((s.teams[0].playoff_prob - 0.909).abs() < 1e-12);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "Team,MeanWins,CI5,CI95,PlayoffPct\nSDP,90.0,90,90,90.9\n"
        );
    }

    #[test]
    fn histogram_fills_gaps_and_matches_mean() {
        let rs: Vec<_> = [80, 83, 83, 85]
            .iter()
            .enumerate()
            .map(|(i, &w)| result(i as u64, &[("NYY", w)], &[]))
            .collect();
        let h = export_win_histogram(&rs, &"NYY".into()).unwrap();
        assert_eq!(
            h.bins,
            vec![(80, 1), (81, 0), (82, 0), (83, 2), (84, 0), (85, 1)]
        );
        assert_eq!(h.total(), 4);
        assert!((h.mean() - summarize(&rs).unwrap().teams[0].mean_wins).abs() < 1e-9);
        assert!(export_win_histogram(&rs, &"XXX".into()).is_err());
    }

    #[test]
    fn results_round_trip() {
        let rs = vec![
            result(0, &[("A", 3), ("B", 5)], &["B"]),
            result(1, &[("A", 6), ("B", 2)], &["A"]),
        ];
        let mut buf = Vec::new();
        write_results_csv(&rs, &mut buf).unwrap();
        assert_eq!(read_results_csv(buf.as_slice(), "t").unwrap(), rs);
    }

    #[test]
    fn table_has_expected_headers() {
        let rs = vec![result(0, &[("A", 3), ("B", 5)], &["B"])];
        let t = summarize(&rs).unwrap().to_table();
        let first = t.lines().next().unwrap();
        assert!(
            first.starts_with("Team | Mean Wins | 90% CI (5, 95) | Playoff %"),
            "{first}"
        );
        assert!(t.lines().nth(2).unwrap().starts_with("B "));
    }
}
