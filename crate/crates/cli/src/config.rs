//! Run settings: built-in defaults, overridden by a TOML file, overridden by flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use pennant_core::batting::WalkConfig;
use pennant_core::era::NoiseParams;
use pennant_core::ingest::{DatasetFilter, MonthDay};
use pennant_core::mcmc::{ChainConfig, PriorConfig};
use pennant_core::season::{
    DrawMode, EraMode, OutcomeMode, PlayoffFormat, SimConfig, DEFAULT_SEASON_LENGTH,
};
use serde::Deserialize;

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Marginal,
    TwoStage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DrawsArg {
    PosteriorPredictive,
    Point,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EraArg {
    ForecastMean,
    Path,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FilterArg {
    DateWindow,
    GamesPlayed,
    None,
}

/// Keys accepted in the config file. Paths are relative to the file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub game_log: Option<PathBuf>,
    pub schedule: Option<PathBuf>,
    pub league: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,

    pub r_max: Option<f64>,
    pub m: Option<f64>,
    pub proposal_std: Option<f64>,
    pub tune_proposal: Option<bool>,
    pub iterations: Option<usize>,
    pub burn_in: Option<usize>,
    pub thin: Option<usize>,
    pub chains: Option<usize>,
    pub filter: Option<String>,
    pub filter_start: Option<String>,
    pub filter_end: Option<String>,
    pub min_games_played: Option<u32>,

    pub window_length: Option<usize>,

    pub replications: Option<usize>,
    pub burn_in_games: Option<u32>,
    pub season_length: Option<u32>,
    pub wild_cards: Option<usize>,
    pub mode: Option<String>,
    pub draws: Option<String>,
    pub era_mode: Option<String>,
    pub walk_std: Option<f64>,
    pub league_mean: Option<f64>,
    pub point_exponents: Option<[f64; 3]>,
    pub sigma_obs: Option<f64>,
    pub sigma_process: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| UsageError::new(format!("cannot read config {}: {e}", path.display())))?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| UsageError::new(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut cfg.game_log,
            &mut cfg.schedule,
            &mut cfg.league,
            &mut cfg.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Flag values; `None` leaves the config-file value or default in place.
#[derive(Debug, Default, Clone)]
pub struct FlagOverrides {
    pub game_log: Option<PathBuf>,
    pub schedule: Option<PathBuf>,
    pub league: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub replications: Option<usize>,
    pub mode: Option<ModeArg>,
    pub draws: Option<DrawsArg>,
}

/// Fully resolved settings for one invocation.
#[derive(Debug, Clone)]
pub struct Settings {
    pub game_log: Option<PathBuf>,
    pub schedule: Option<PathBuf>,
    pub league: Option<PathBuf>,
    pub out: PathBuf,
    pub seed: u64,
    pub prior: PriorConfig,
    pub chain: ChainConfig,
    pub chains: usize,
    pub tune_proposal: bool,
    pub filter: DatasetFilter,
    pub window_length: usize,
    pub replications: usize,
    pub season_length: u32,
    pub sim: SimConfig,
    pub point_exponents: Option<[f64; 3]>,
    pub fixed_noise: Option<NoiseParams>,
}

pub const DEFAULT_OUT: &str = "pennant-out";
pub const DEFAULT_SEED: u64 = 20_250_101;
pub const DEFAULT_CHAINS: usize = 4;
pub const DEFAULT_WINDOW: usize = 30;
pub const DEFAULT_REPLICATIONS: usize = 1_000;

fn parse_enum<T: ValueEnum>(key: &str, value: Option<&str>) -> Result<Option<T>> {
    value
        .map(|v| {
            T::from_str(v, true).map_err(|_| {
                UsageError::new(format!("config key `{key}`: unrecognised value `{v}`")).into()
            })
        })
        .transpose()
}

impl Settings {
    pub fn resolve(file: FileConfig, flags: FlagOverrides) -> Result<Self> {
        let prior = PriorConfig {
            r_max: file.r_max.unwrap_or(pennant_core::mcmc::DEFAULT_R_MAX),
        };
        let base_chain = ChainConfig::default();
        let seed = flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED);
        let chain = ChainConfig {
            n_iterations: file.iterations.unwrap_or(base_chain.n_iterations),
            burn_in: file.burn_in.unwrap_or(base_chain.burn_in),
            thin: file.thin.unwrap_or(base_chain.thin),
            proposal_std: file
                .proposal_std
                .map(|s| [s; 3])
                .unwrap_or(base_chain.proposal_std),
            seed,
            init: base_chain.init,
        };

        let mut filter = match parse_enum::<FilterArg>("filter", file.filter.as_deref())?
            .unwrap_or(FilterArg::DateWindow)
        {
            FilterArg::DateWindow => DatasetFilter::date_window(),
            FilterArg::GamesPlayed => DatasetFilter::games_played(),
            FilterArg::None => DatasetFilter::none(),
        };
        let month_day = |key: &str, v: &str| -> Result<MonthDay> {
            v.parse()
                .map_err(|e| UsageError::new(format!("config key `{key}`: {e}")).into())
        };
        if let Some(s) = &file.filter_start {
            filter.start = month_day("filter_start", s)?;
        }
        if let Some(s) = &file.filter_end {
            filter.end = month_day("filter_end", s)?;
        }
        if let Some(n) = file.min_games_played {
            filter.min_games_played = n;
        }

        let outcome = match flags.mode.or(parse_enum("mode", file.mode.as_deref())?) {
            Some(ModeArg::TwoStage) => OutcomeMode::TwoStage,
            _ => OutcomeMode::Marginal,
        };
        let draws = match flags.draws.or(parse_enum("draws", file.draws.as_deref())?) {
            Some(DrawsArg::Point) => DrawMode::Point,
            _ => DrawMode::PosteriorPredictive,
        };
        let era = match parse_enum("era_mode", file.era_mode.as_deref())? {
            Some(EraArg::Path) => EraMode::Path,
            _ => EraMode::ForecastMean,
        };
        let walk_default = WalkConfig::default();
        let sim_default = SimConfig::default();
        let sim = SimConfig {
            m: file.m.unwrap_or(sim_default.m),
            outcome,
            draws,
            era,
            walk: WalkConfig {
                step_std: file.walk_std.unwrap_or(walk_default.step_std),
                league_mean: file.league_mean.unwrap_or(walk_default.league_mean),
                clamp: walk_default.clamp,
            },
            burn_in_games: file.burn_in_games.unwrap_or(sim_default.burn_in_games),
            playoffs: PlayoffFormat {
                wild_cards: file
                    .wild_cards
                    .unwrap_or(PlayoffFormat::default().wild_cards),
            },
        };
        let fixed_noise = match (file.sigma_obs, file.sigma_process) {
            (Some(o), Some(p)) => {
                Some(NoiseParams::new(o, p).map_err(|e| UsageError::new(e.to_string()))?)
            }
            (None, None) => None,
            _ => bail!(UsageError::new(
                "set both sigma_obs and sigma_process, or neither"
            )),
        };

        let settings = Settings {
            game_log: flags.game_log.or(file.game_log),
            schedule: flags.schedule.or(file.schedule),
            league: flags.league.or(file.league),
            out: flags
                .out
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT)),
            seed,
            prior,
            chain,
            chains: file.chains.unwrap_or(DEFAULT_CHAINS),
            tune_proposal: file.tune_proposal.unwrap_or(file.proposal_std.is_none()),
            filter,
            window_length: file.window_length.unwrap_or(DEFAULT_WINDOW),
            replications: flags
                .replications
                .or(file.replications)
                .unwrap_or(DEFAULT_REPLICATIONS),
            season_length: file.season_length.unwrap_or(DEFAULT_SEASON_LENGTH),
            sim,
            point_exponents: file.point_exponents,
            fixed_noise,
        };
        settings
            .check()
            .map_err(|e| UsageError::new(e.to_string()))?;
        Ok(settings)
    }

    fn check(&self) -> Result<()> {
        self.prior.validate()?;
        self.chain.validate(&self.prior)?;
        self.filter.validate()?;
        self.sim.validate()?;
        if self.chains == 0 {
            bail!("chains must be at least 1");
        }
        if self.replications == 0 {
            bail!("replications must be at least 1");
        }
        if self.window_length < pennant_core::era::MIN_WINDOW {
            bail!(
                "window_length must be at least {}",
                pennant_core::era::MIN_WINDOW
            );
        }
        if let Some(r) = self.point_exponents {
            if !self.prior.contains(&r) {
                bail!(
                    "point_exponents {r:?} lie outside [0, {}]",
                    self.prior.r_max
                );
            }
        }
        Ok(())
    }

    /// The game log, which must exist.
    pub fn require_game_log(&self) -> Result<&Path> {
        let p = self.game_log.as_deref().ok_or_else(|| {
            UsageError::new("no game log given; pass --game-log or set `game_log` in the config")
        })?;
        if !p.is_file() {
            bail!(UsageError::new(format!(
                "game log {} does not exist",
                p.display()
            )));
        }
        Ok(p)
    }

    pub fn out_file(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    pub fn create_out_dir(&self) -> Result<()> {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating output directory {}", self.out.display()))
    }
}
