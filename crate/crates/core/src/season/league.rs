use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::TeamId;

pub const DEFAULT_SEASON_LENGTH: u32 = 162;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Division {
    pub name: String,
    pub teams: Vec<TeamId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct League {
    pub name: String,
    pub divisions: Vec<Division>,
}

impl League {
    pub fn teams(&self) -> impl Iterator<Item = &TeamId> {
        self.divisions.iter().flat_map(|d| d.teams.iter())
    }
}

/// Leagues, their divisions, and the regular-season length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LeagueStructure {
    pub leagues: Vec<League>,
    pub season_length: u32,
}

impl LeagueStructure {
    /// All teams in file order (league, then division, then listing order).
    pub fn teams(&self) -> Vec<TeamId> {
        self.leagues
            .iter()
            .flat_map(|l| l.teams().cloned())
            .collect()
    }

    pub fn team_set(&self) -> BTreeSet<TeamId> {
        self.leagues
            .iter()
            .flat_map(|l| l.teams().cloned())
            .collect()
    }

    pub fn league_of(&self, team: &TeamId) -> Option<&League> {
        self.leagues.iter().find(|l| l.teams().any(|t| t == team))
    }

    pub fn division_of(&self, team: &TeamId) -> Option<&Division> {
        self.leagues
            .iter()
            .flat_map(|l| l.divisions.iter())
            .find(|d| d.teams.contains(team))
    }

    /// Structural problems, empty when the structure is a valid partition.
    pub fn issues(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if self.season_length == 0 {
            issues.push("season length must be positive".to_owned());
        }
        if self.leagues.is_empty() {
            issues.push("league structure lists no leagues".to_owned());
        }
        let mut seen: BTreeMap<&TeamId, (&str, &str)> = BTreeMap::new();
        for l in &self.leagues {
            if l.divisions.is_empty() {
                issues.push(format!("league {} has no divisions", l.name));
            }
            for d in &l.divisions {
                if d.teams.is_empty() {
                    issues.push(format!("division {}/{} has no teams", l.name, d.name));
                }
                for t in &d.teams {
                    if let Some((pl, pd)) = seen.insert(t, (&l.name, &d.name)) {
                        issues.push(format!(
                            "team {t} appears in both {pl}/{pd} and {}/{}",
                            l.name, d.name
                        ));
                    }
                }
            }
            let sizes: BTreeSet<usize> = l.divisions.iter().map(|d| d.teams.len()).collect();
            if sizes.len() > 1 {
                issues.push(format!(
                    "divisions in league {} have unequal sizes {sizes:?}",
                    l.name
                ));
            }
        }
        issues
    }

    pub fn validate(&self) -> Result<()> {
        match self.issues().as_slice() {
            [] => Ok(()),
            issues => Err(Error::mismatch(format!(
                "malformed league structure: {}",
                issues.join("; ")
            ))),
        }
    }

    /// Reads `league,division,team` rows. Duplicates are kept so that
    /// [`issues`](Self::issues) can report them.
    pub fn parse<R: Read>(reader: R, source_name: &str, season_length: u32) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let headers = rdr.headers()?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| Error::Parse {
                    source_name: source_name.to_owned(),
                    row: 1,
                    column: name.to_owned(),
                    message: "missing column".into(),
                })
        };
        let (lc, dc, tc) = (col("league")?, col("division")?, col("team")?);
        let mut leagues: Vec<League> = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let get = |c: usize, name: &str| -> Result<String> {
                match rec.get(c) {
                    Some(v) if !v.is_empty() => Ok(v.to_owned()),
                    _ => Err(Error::Parse {
                        source_name: source_name.to_owned(),
                        row: i + 2,
                        column: name.to_owned(),
                        message: "missing value".into(),
                    }),
                }
            };
            let (ln, dn, team) = (
                get(lc, "league")?,
                get(dc, "division")?,
                TeamId::new(get(tc, "team")?),
            );
            let li = match leagues.iter().position(|l| l.name == ln) {
                Some(i) => i,
                None => {
                    leagues.push(League {
                        name: ln,
                        divisions: Vec::new(),
                    });
                    leagues.len() - 1
                }
            };
            let divs = &mut leagues[li].divisions;
            match divs.iter_mut().find(|d| d.name == dn) {
                Some(d) => d.teams.push(team),
                None => divs.push(Division {
                    name: dn,
                    teams: vec![team],
                }),
            }
        }
        Ok(LeagueStructure {
            leagues,
            season_length,
        })
    }

    pub fn read(path: &Path, season_length: u32) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::File {
            path: path.to_owned(),
            source,
        })?;
        Self::parse(file, &path.display().to_string(), season_length)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["league", "division", "team"])?;
        for l in &self.leagues {
            for d in &l.divisions {
                for t in &d.teams {
                    out.write_record([l.name.as_str(), d.name.as_str(), t.as_str()])?;
                }
            }
        }
        out.flush()?;
        Ok(())
    }

    /// Two leagues of three five-team divisions, using current MLB codes.
    pub fn mlb() -> Self {
        type DivisionRow = (&'static str, [&'static str; 5]);
        const LAYOUT: [(&str, [DivisionRow; 3]); 2] = [
            (
                "AL",
                [
                    ("East", ["BAL", "BOS", "NYY", "TBR", "TOR"]),
                    ("Central", ["CHW", "CLE", "DET", "KCR", "MIN"]),
                    ("West", ["ATH", "HOU", "LAA", "SEA", "TEX"]),
                ],
            ),
            (
                "NL",
                [
                    ("East", ["ATL", "MIA", "NYM", "PHI", "WSN"]),
                    ("Central", ["CHC", "CIN", "MIL", "PIT", "STL"]),
                    ("West", ["ARI", "COL", "LAD", "SDP", "SFG"]),
                ],
            ),
        ];
        LeagueStructure {
            leagues: LAYOUT
                .iter()
                .map(|(name, divs)| League {
                    name: (*name).to_owned(),
                    divisions: divs
                        .iter()
                        .map(|(dn, teams)| Division {
                            name: (*dn).to_owned(),
                            teams: teams.iter().map(|&t| TeamId::new(t)).collect(),
                        })
                        .collect(),
                })
                .collect(),
            season_length: DEFAULT_SEASON_LENGTH,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mlb_layout_is_valid() {
        let l = LeagueStructure::mlb();
        l.validate().unwrap();
        assert_eq!(l.teams().len(), 30);
        assert_eq!(l.league_of(&"LAD".into()).unwrap().name, "NL");
        assert_eq!(l.division_of(&"NYY".into()).unwrap().name, "East");
    }

    #[test]
    fn duplicate_team_is_reported() {
        let text = "league,division,team\nAL,East,NYY\nAL,West,NYY\n";
        let l = LeagueStructure::parse(text.as_bytes(), "t", 162).unwrap();
        let issues = l.issues();
        assert!(
            issues
                .iter()
                .any(|i| i.contains("NYY") && i.contains("both")),
            "{issues:?}"
        );
    }

    #[test]
    fn unequal_divisions_are_reported() {
        let text = "league,division,team\nAL,East,A\nAL,East,B\nAL,West,C\n";
        let l = LeagueStructure::parse(text.as_bytes(), "t", 162).unwrap();
        assert!(l.issues().iter().any(|i| i.contains("unequal")));
        assert!(l.validate().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let l = LeagueStructure::mlb();
        let mut buf = Vec::new();
        l.write_csv(&mut buf).unwrap();
        assert_eq!(LeagueStructure::parse(buf.as_slice(), "t", 162).unwrap(), l);
    }
}
