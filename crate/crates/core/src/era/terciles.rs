use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::TeamId;

/// Games used for the early-season ERA that assigns terciles.
pub const EARLY_GAMES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tercile {
    Low,
    Medium,
    High,
}

impl Tercile {
    pub const ALL: [Tercile; 3] = [Tercile::Low, Tercile::Medium, Tercile::High];
}

impl fmt::Display for Tercile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tercile::Low => "low",
            Tercile::Medium => "medium",
            Tercile::High => "high",
        })
    }
}

impl FromStr for Tercile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "low" => Ok(Tercile::Low),
            "medium" => Ok(Tercile::Medium),
            "high" => Ok(Tercile::High),
            other => Err(Error::domain(format!("unknown tercile `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TercileGrouping {
    pub low: Vec<TeamId>,
    pub medium: Vec<TeamId>,
    pub high: Vec<TeamId>,
}

impl TercileGrouping {
    pub fn tercile_of(&self, team: &TeamId) -> Option<Tercile> {
        Tercile::ALL
            .into_iter()
            .find(|&t| self.members(t).contains(team))
    }

    pub fn members(&self, tercile: Tercile) -> &[TeamId] {
        match tercile {
            Tercile::Low => &self.low,
            Tercile::Medium => &self.medium,
            Tercile::High => &self.high,
        }
    }

    /// `(team, tercile)` pairs, low tercile first.
    pub fn assignments(&self) -> impl Iterator<Item = (&TeamId, Tercile)> {
        Tercile::ALL
            .into_iter()
            .flat_map(move |t| self.members(t).iter().map(move |team| (team, t)))
    }
}

/// Sorts teams by early-season mean ERA (ties by identifier) and cuts them
/// into three contiguous groups; any remainder goes to the lower groups.
pub fn group_terciles(team_early_eras: &BTreeMap<TeamId, f64>) -> Result<TercileGrouping> {
    let n = team_early_eras.len();
    if n < 3 {
        return Err(Error::insufficient(format!(
            "tercile grouping needs at least 3 teams, got {n}"
        )));
    }
    if let Some((t, v)) = team_early_eras.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::domain(format!(
            "early ERA for {t} is not finite ({v})"
        )));
    }
    let mut ordered: Vec<(&TeamId, f64)> = team_early_eras.iter().map(|(t, &e)| (t, e)).collect();
    ordered.sort_by(|a, b| a.1.total_cmp(&b.1).then_with(|| a.0.cmp(b.0)));

    let base = n / 3;
    let extra = n % 3;
    let sizes = [
        base + usize::from(extra > 0),
        base + usize::from(extra > 1),
        base,
    ];
    let mut it = ordered.into_iter().map(|(t, _)| t.clone());
    let mut take = |k: usize| it.by_ref().take(k).collect::<Vec<_>>();
    Ok(TercileGrouping {
        low: take(sizes[0]),
        medium: take(sizes[1]),
        high: take(sizes[2]),
    })
}
