use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;

use super::league::LeagueStructure;
use crate::error::{Error, Result};
use crate::model::TeamId;

/// Qualification rule applied to each league separately.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlayoffFormat {
    /// Best non-division-winners admitted per league.
    pub wild_cards: usize,
}

impl Default for PlayoffFormat {
    fn default() -> Self {
        PlayoffFormat { wild_cards: 3 }
    }
}

impl PlayoffFormat {
    pub fn qualifiers_per_league(&self, league: &super::league::League) -> usize {
        let teams = league.teams().count();
        (league.divisions.len() + self.wild_cards).min(teams)
    }
}

/// Division winners plus wild cards in every league.
///
/// Ties are broken by one uniform key per team, drawn in league-structure
/// order, so the result depends only on the standings and the stream.
pub fn playoff_qualifiers<R: Rng + ?Sized>(
    wins: &BTreeMap<TeamId, u32>,
    league: &LeagueStructure,
    format: &PlayoffFormat,
    rng: &mut R,
) -> Result<BTreeSet<TeamId>> {
    league.validate()?;
    let mut keys: BTreeMap<&TeamId, (u32, u64)> = BTreeMap::new();
    for team in league.leagues.iter().flat_map(|l| l.teams()) {
        let w = *wins
            .get(team)
            .ok_or_else(|| Error::UnknownTeam(format!("no final standing for team {team}")))?;
        keys.insert(team, (w, rng.random()));
    }
    let mut qualifiers = BTreeSet::new();
    for l in &league.leagues {
        let best = |teams: &mut Vec<&TeamId>| teams.sort_by(|a, b| keys[b].cmp(&keys[a]));
        let mut others = Vec::new();
        for d in &l.divisions {
            let mut teams: Vec<&TeamId> = d.teams.iter().collect();
            best(&mut teams);
            qualifiers.insert(teams[0].clone());
            others.extend_from_slice(&teams[1..]);
        }
        best(&mut others);
        qualifiers.extend(others.into_iter().take(format.wild_cards).cloned());
    }
    Ok(qualifiers)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;

    #[test]
    fn all_equal_records_still_fill_the_bracket() {
        let league = LeagueStructure::mlb();
        let wins: BTreeMap<TeamId, u32> = league.teams().into_iter().map(|t| (t, 81)).collect();
        let fmt = PlayoffFormat::default();
        let a = playoff_qualifiers(&wins, &league, &fmt, &mut rng_from_seed(5)).unwrap();
        let b = playoff_qualifiers(&wins, &league, &fmt, &mut rng_from_seed(5)).unwrap();
        assert_eq!(a, b);
        for l in &league.leagues {
            assert_eq!(l.teams().filter(|t| a.contains(*t)).count(), 6);
        }
    }

    #[test]
    fn strict_order_by_hand() {
        let league = LeagueStructure::mlb();
        // AL: index 0..15 in file order, more wins for earlier teams, so each
        // division's first team wins it and the East's 2nd-4th are wild cards.
        let wins: BTreeMap<TeamId, u32> = league
            .teams()
            .into_iter()
            .enumerate()
            .map(|(i, t)| (t, 120 - i as u32))
            .collect();
        let q = playoff_qualifiers(
            &wins,
            &league,
            &PlayoffFormat::default(),
            &mut rng_from_seed(1),
        )
        .unwrap();
        let expect: BTreeSet<TeamId> = [
            "BAL", "BOS", "NYY", "TBR", "CHW", "ATH", "ATL", "MIA", "NYM", "PHI", "CHC", "ARI",
        ]
        .into_iter()
        .map(TeamId::from)
        .collect();
        assert_eq!(q, expect);
    }

    #[test]
    fn missing_team_is_an_error() {
        let league = LeagueStructure::mlb();
        let wins = BTreeMap::new();
        assert!(playoff_qualifiers(
            &wins,
            &league,
            &PlayoffFormat::default(),
            &mut rng_from_seed(1)
        )
        .is_err());
    }
}
