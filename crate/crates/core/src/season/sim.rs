use std::collections::{BTreeMap, BTreeSet, HashMap};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use super::league::LeagueStructure;
use super::playoffs::{playoff_qualifiers, PlayoffFormat};
use super::schedule::Schedule;
use crate::batting::WalkConfig;
use crate::era::{
    filter_series, sample_noise, KalmanState, NoiseParams, NoisePools, Tercile, ERA_FLOOR,
};
use crate::error::{Error, Result};
use crate::mcmc::PosteriorSample;
use crate::model::{
    compute_lambda, draw_latent_prob, marginal_home_win_prob, ratios_from_records, ModelParams,
    TeamId, TeamStats,
};
use crate::rng::{self, derive_seed, SimRng};
use crate::stats;

pub const DEFAULT_BURN_IN_GAMES: u32 = 20;

/// How a game's home-win probability becomes an outcome.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum OutcomeMode {
    /// Bernoulli on `lambda / (1 + lambda)`.
    #[default]
    Marginal,
    /// Beta draw of the latent probability, then Bernoulli.
    TwoStage,
}

/// Which exponents each game uses.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum DrawMode {
    /// A fresh uniformly chosen posterior draw per game.
    #[default]
    PosteriorPredictive,
    /// The posterior mean for every game.
    Point,
}

/// ERA fed into the strength ratio during simulation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum EraMode {
    /// The filter's forecast mean.
    #[default]
    ForecastMean,
    /// A noisy observed ERA around a simulated latent level.
    Path,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub m: f64,
    pub outcome: OutcomeMode,
    pub draws: DrawMode,
    pub era: EraMode,
    pub walk: WalkConfig,
    /// Real games each team must have played before simulation takes over.
    pub burn_in_games: u32,
    pub playoffs: PlayoffFormat,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            m: 1.0,
            outcome: OutcomeMode::default(),
            draws: DrawMode::default(),
            era: EraMode::default(),
            walk: WalkConfig::default(),
            burn_in_games: DEFAULT_BURN_IN_GAMES,
            playoffs: PlayoffFormat::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(Error::config(format!(
                "concentration m must be positive, got {}",
                self.m
            )));
        }
        self.walk.validate()
    }
}

/// Posterior exponents prepared for per-game use.
#[derive(Debug, Clone)]
pub struct ExponentSource {
    sample: PosteriorSample,
    mean: [f64; 3],
    mode: DrawMode,
}

impl ExponentSource {
    pub fn new(sample: PosteriorSample, mode: DrawMode) -> Result<Self> {
        if sample.draws.is_empty() {
            return Err(Error::insufficient("posterior sample has no draws"));
        }
        let mean = sample.mean();
        Ok(ExponentSource { sample, mean, mode })
    }

    pub fn sample(&self) -> &PosteriorSample {
        &self.sample
    }

    pub fn mode(&self) -> DrawMode {
        self.mode
    }

    fn exponents<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 3] {
        match self.mode {
            DrawMode::PosteriorPredictive => self.sample.pick(rng),
            DrawMode::Point => self.mean,
        }
    }
}

/// A team's evolving state within one simulated season.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamSimState {
    pub team: TeamId,
    pub wins: u32,
    pub losses: u32,
    /// Batting average minus the league mean.
    pub batting_deviation: f64,
    pub era_state: KalmanState,
    pub noise: NoiseParams,
    pub tercile: Tercile,
}

impl TeamSimState {
    pub fn played(&self) -> u32 {
        self.wins + self.losses
    }

    pub fn win_pct(&self) -> Option<f64> {
        match self.played() {
            0 => None,
            n => Some(self.wins as f64 / n as f64),
        }
    }

    fn stats<R: Rng + ?Sized>(&self, cfg: &SimConfig, rng: &mut R) -> Result<TeamStats> {
        let win_pct = self.win_pct().ok_or_else(|| {
            Error::insufficient(format!(
                "team {} has no games of record before simulation",
                self.team
            ))
        })?;
        let era = match cfg.era {
            EraMode::ForecastMean => self.era_state.mean,
            EraMode::Path => {
                let z: f64 = StandardNormal.sample(rng);
                self.era_state.mean + self.noise.sigma_obs * z
            }
        };
        Ok(TeamStats {
            win_pct,
            batting_avg: cfg.walk.implied_average(self.batting_deviation),
            starter_era: era.max(ERA_FLOOR),
        })
    }

    fn advance<R: Rng + ?Sized>(&mut self, won: bool, cfg: &SimConfig, rng: &mut R) {
        if won {
            self.wins += 1;
        } else {
            self.losses += 1;
        }
        self.batting_deviation += cfg.walk.step(rng);
        if cfg.era == EraMode::Path {
            let z: f64 = StandardNormal.sample(rng);
            self.era_state.mean += self.noise.sigma_process * z;
        }
        self.era_state = self.era_state.propagate(&self.noise);
    }
}

/// Simulates one game; `true` means the home team won.
pub fn simulate_game<R: Rng + ?Sized>(
    home: &TeamSimState,
    away: &TeamSimState,
    source: &ExponentSource,
    cfg: &SimConfig,
    rng: &mut R,
) -> Result<bool> {
    let (h, a) = (home.stats(cfg, rng)?, away.stats(cfg, rng)?);
    let params = ModelParams {
        r: source.exponents(rng),
        m: cfg.m,
    };
    let lambda = compute_lambda(&ratios_from_records(&h, &a), &params)?;
    let p = match cfg.outcome {
        OutcomeMode::Marginal => marginal_home_win_prob(lambda)?,
        OutcomeMode::TwoStage => draw_latent_prob(lambda, cfg.m, rng)?,
    };
    Ok(rng.random_bool(p.clamp(0.0, 1.0)))
}

/// Records a result and advances the batting walk and ERA filter by one game.
pub fn update_after_game<R: Rng + ?Sized>(
    state: &TeamSimState,
    won: bool,
    cfg: &SimConfig,
    rng: &mut R,
) -> TeamSimState {
    let mut next = state.clone();
    next.advance(won, cfg, rng);
    next
}

/// Final standings of one simulated season.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeasonResult {
    pub replication_id: u64,
    pub wins: BTreeMap<TeamId, u32>,
    pub qualifiers: BTreeSet<TeamId>,
}

impl SeasonResult {
    pub fn total_wins(&self) -> u64 {
        self.wins.values().map(|&w| w as u64).sum()
    }
}

/// Seed of replication `id` under a master seed.
pub fn replication_seed(base_seed: u64, id: u64) -> u64 {
    derive_seed(derive_seed(base_seed, rng::tags::REPLICATIONS), id)
}

/// Schedule resolved to positions in the state vector.
struct Fixtures {
    order: Vec<TeamId>,
    games: Vec<(usize, usize)>,
}

impl Fixtures {
    fn resolve(league: &LeagueStructure, schedule: &Schedule) -> Result<Self> {
        league.validate()?;
        let order = league.teams();
        let index: HashMap<&TeamId, usize> =
            order.iter().enumerate().map(|(i, t)| (t, i)).collect();
        let pos = |t: &TeamId| {
            index.get(t).copied().ok_or_else(|| {
                Error::UnknownTeam(format!("scheduled team {t} is not in the league structure"))
            })
        };
        let mut dated: Vec<_> = schedule.games.iter().collect();
        dated.sort_by_key(|g| g.date);
        let games = dated
            .into_iter()
            .map(|g| Ok((pos(&g.home)?, pos(&g.away)?)))
            .collect::<Result<_>>()?;
        Ok(Fixtures { order, games })
    }

    /// Reorders states into league order, checking coverage and burn-in.
    fn arrange(
        &self,
        initial: &[TeamSimState],
        cfg: &SimConfig,
        season_length: u32,
    ) -> Result<Vec<TeamSimState>> {
        let by_team: BTreeMap<&TeamId, &TeamSimState> =
            initial.iter().map(|s| (&s.team, s)).collect();
        if by_team.len() != initial.len() {
            return Err(Error::mismatch("duplicate team in initial states"));
        }
        if let Some(extra) = by_team.keys().find(|t| !self.order.contains(t)) {
            return Err(Error::mismatch(format!(
                "initial state for {extra}, which is not in the league structure"
            )));
        }
        let mut scheduled = vec![0u32; self.order.len()];
        for &(h, a) in &self.games {
            scheduled[h] += 1;
            scheduled[a] += 1;
        }
        self.order
            .iter()
            .zip(&scheduled)
            .map(|(t, &n)| {
                let s = by_team.get(t).ok_or_else(|| Error::mismatch(format!("no initial state for team {t}")))?;
                if s.played() < cfg.burn_in_games.max(1) {
                    return Err(Error::insufficient(format!(
                        "team {t} has played {} games, fewer than the {}-game burn-in",
                        s.played(),
                        cfg.burn_in_games.max(1)
                    )));
                }
                if s.played() + n > season_length {
                    return Err(Error::mismatch(format!(
                        "team {t}: {} played plus {n} scheduled exceeds the {season_length}-game season",
                        s.played()
                    )));
                }
                Ok((*s).clone())
            })
            .collect()
    }

    fn play(
        &self,
        mut states: Vec<TeamSimState>,
        source: &ExponentSource,
        league: &LeagueStructure,
        cfg: &SimConfig,
        replication_id: u64,
        rng: &mut SimRng,
    ) -> Result<SeasonResult> {
        for &(h, a) in &self.games {
            let home_won = simulate_game(&states[h], &states[a], source, cfg, rng)?;
            states[h].advance(home_won, cfg, rng);
            states[a].advance(!home_won, cfg, rng);
        }
        let wins: BTreeMap<TeamId, u32> = states.into_iter().map(|s| (s.team, s.wins)).collect();
        let qualifiers = playoff_qualifiers(&wins, league, &cfg.playoffs, rng)?;
        Ok(SeasonResult {
            replication_id,
            wins,
            qualifiers,
        })
    }
}

/// Plays the schedule in date order from fixed initial states.
pub fn run_replication(
    initial: &[TeamSimState],
    schedule: &Schedule,
    source: &ExponentSource,
    league: &LeagueStructure,
    cfg: &SimConfig,
    replication_id: u64,
    seed: u64,
) -> Result<SeasonResult> {
    cfg.validate()?;
    let fixtures = Fixtures::resolve(league, schedule)?;
    let states = fixtures.arrange(initial, cfg, league.season_length)?;
    fixtures.play(
        states,
        source,
        league,
        cfg,
        replication_id,
        &mut rng::rng_from_seed(seed),
    )
}

/// `n` replications from fixed initial states, replication `i` seeded with
/// [`replication_seed`]`(base_seed, i)`. Results come back in id order
/// regardless of thread count.
pub fn run_replications(
    n: usize,
    initial: &[TeamSimState],
    schedule: &Schedule,
    source: &ExponentSource,
    league: &LeagueStructure,
    cfg: &SimConfig,
    base_seed: u64,
) -> Result<Vec<SeasonResult>> {
    if n == 0 {
        return Err(Error::config("replication count must be at least 1"));
    }
    cfg.validate()?;
    let fixtures = Fixtures::resolve(league, schedule)?;
    let states = fixtures.arrange(initial, cfg, league.season_length)?;
    (0..n as u64)
        .into_par_iter()
        .map(|id| {
            let mut rng = rng::rng_from_seed(replication_seed(base_seed, id));
            fixtures.play(states.clone(), source, league, cfg, id, &mut rng)
        })
        .collect()
}

/// A team's real record and inputs at the point simulation takes over.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamOpening {
    pub team: TeamId,
    pub wins: u32,
    pub losses: u32,
    /// Season-to-date batting average.
    pub batting_avg: f64,
    /// Starter ERA observed before each real game this season, oldest first.
    pub era_observations: Vec<f64>,
    pub tercile: Tercile,
}

/// Where each replication gets a team's noise pair.
#[derive(Debug, Clone, PartialEq)]
pub enum NoiseSource {
    Fixed(NoiseParams),
    /// Resampled per team and replication from the team's tercile.
    Pooled(NoisePools),
}

/// Everything needed to simulate the rest of a season from real openings.
///
/// Unlike [`run_replications`], each replication draws fresh noise pairs and
/// re-filters the opening ERA observations under them.
#[derive(Debug)]
pub struct Forecast {
    league: LeagueStructure,
    fixtures: Fixtures,
    openings: Vec<TeamOpening>,
    source: ExponentSource,
    noise: NoiseSource,
    cfg: SimConfig,
}

impl std::fmt::Debug for Fixtures {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fixtures")
            .field("teams", &self.order.len())
            .field("games", &self.games.len())
            .finish()
    }
}

impl Forecast {
    /// Checks that every team's played plus scheduled games equal the season length.
    pub fn new(
        league: LeagueStructure,
        schedule: &Schedule,
        openings: Vec<TeamOpening>,
        source: ExponentSource,
        noise: NoiseSource,
        cfg: SimConfig,
    ) -> Result<Self> {
        cfg.validate()?;
        let fixtures = Fixtures::resolve(&league, schedule)?;
        let played: BTreeMap<TeamId, u32> = openings
            .iter()
            .map(|o| (o.team.clone(), o.wins + o.losses))
            .collect();
        if played.len() != openings.len() {
            return Err(Error::mismatch("duplicate team in season openings"));
        }
        let issues = schedule.issues(&league, Some(&played));
        if !issues.is_empty() {
            return Err(Error::mismatch(issues.join("; ")));
        }
        for o in &openings {
            if o.era_observations.is_empty()
                || o.era_observations
                    .iter()
                    .any(|e| !e.is_finite() || *e < 0.0)
            {
                return Err(Error::insufficient(format!(
                    "team {}: no usable ERA observations before simulation",
                    o.team
                )));
            }
        }
        if let NoiseSource::Fixed(p) = &noise {
            p.validate()?;
        }
        let by_team: BTreeMap<TeamId, TeamOpening> =
            openings.into_iter().map(|o| (o.team.clone(), o)).collect();
        let openings = fixtures
            .order
            .iter()
            .map(|t| {
                by_team
                    .get(t)
                    .cloned()
                    .ok_or_else(|| Error::mismatch(format!("no season opening for team {t}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Forecast {
            league,
            fixtures,
            openings,
            source,
            noise,
            cfg,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn scheduled_games(&self) -> usize {
        self.fixtures.games.len()
    }

    /// Initial states for one replication, drawing noise pairs from `rng`.
    pub fn initial_states<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<TeamSimState>> {
        self.openings
            .iter()
            .map(|o| {
                let noise = match &self.noise {
                    NoiseSource::Fixed(p) => *p,
                    NoiseSource::Pooled(pools) => sample_noise(o.tercile, pools, rng)?,
                };
                let obs = &o.era_observations;
                let spread = stats::sample_variance(obs);
                let init =
                    KalmanState::new(obs[0], if spread > 0.0 { 10.0 * spread } else { 1.0 })?;
                let era_state = match &obs[1..] {
                    [] => init,
                    rest => filter_series(&init, rest, &noise)?.last(),
                };
                Ok(TeamSimState {
                    team: o.team.clone(),
                    wins: o.wins,
                    losses: o.losses,
                    batting_deviation: o.batting_avg - self.cfg.walk.league_mean,
                    era_state,
                    noise,
                    tercile: o.tercile,
                })
            })
            .collect()
    }

    pub fn run_replication(&self, id: u64, base_seed: u64) -> Result<SeasonResult> {
        let mut rng = rng::rng_from_seed(replication_seed(base_seed, id));
        let initial = self.initial_states(&mut rng)?;
        let states = self
            .fixtures
            .arrange(&initial, &self.cfg, self.league.season_length)?;
        self.fixtures
            .play(states, &self.source, &self.league, &self.cfg, id, &mut rng)
    }

    pub fn run_replications(&self, n: usize, base_seed: u64) -> Result<Vec<SeasonResult>> {
        if n == 0 {
            return Err(Error::config("replication count must be at least 1"));
        }
        (0..n as u64)
            .into_par_iter()
            .map(|id| self.run_replication(id, base_seed))
            .collect()
    }
}
