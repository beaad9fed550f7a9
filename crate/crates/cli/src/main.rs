use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod data;

use config::{DrawsArg, FileConfig, FlagOverrides, ModeArg, Settings};

/// Fit a game-outcome model to historical logs and forecast the rest of a season.
#[derive(Debug, Parser)]
#[command(name = "pennant", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// TOML file of run settings.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    game_log: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    league: Option<PathBuf>,
    #[arg(long, global = true, value_name = "PATH")]
    schedule: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    replications: Option<usize>,
    /// How a game's win probability becomes an outcome.
    #[arg(long, global = true, value_enum)]
    mode: Option<ModeArg>,
    /// Which exponents each simulated game uses.
    #[arg(long, global = true, value_enum)]
    draws: Option<DrawsArg>,
    /// Worker threads; results do not depend on this.
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check inputs for schema and consistency problems.
    Validate,
    /// Sample the outcome-model exponents by MCMC.
    Fit,
    /// Estimate ERA noise pools by tercile.
    Noise,
    /// Simulate the remaining season.
    Simulate {
        /// Also write a win histogram for this team (repeatable).
        #[arg(long, value_name = "TEAM")]
        histogram: Vec<String>,
    },
    /// Rebuild the summary and histograms from saved results.
    Report {
        #[arg(long, value_name = "TEAM")]
        histogram: Vec<String>,
    },
    /// Write a synthetic league, game log and schedule.
    Generate(commands::generate::GenerateArgs),
}

/// Bad invocation or missing input; exits with status 2.
#[derive(Debug)]
pub struct UsageError(String);

impl UsageError {
    pub fn new(msg: impl Into<String>) -> Self {
        UsageError(msg.into())
    }
}

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

/// How a command that ran to completion ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Clean,
    /// Finished, but validation issues or convergence warnings were found.
    Flagged,
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    if let Some(n) = cli.global.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()?;
    }
    let file = match &cli.global.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let g = cli.global;
    let flags = FlagOverrides {
        game_log: g.game_log,
        schedule: g.schedule,
        league: g.league,
        out: g.out,
        seed: g.seed,
        replications: g.replications,
        mode: g.mode,
        draws: g.draws,
    };
    let settings = Settings::resolve(file, flags)?;
    match cli.command {
        Command::Validate => commands::validate::run(&settings),
        Command::Fit => commands::fit::run(&settings),
        Command::Noise => commands::noise::run(&settings),
        Command::Simulate { histogram } => commands::simulate::run(&settings, &histogram),
        Command::Report { histogram } => commands::report::run(&settings, &histogram),
        Command::Generate(args) => commands::generate::run(&settings, &args),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Clean) => ExitCode::SUCCESS,
        Ok(Outcome::Flagged) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else if e.downcast_ref::<data::InvalidInput>().is_some() {
                ExitCode::from(1)
            } else {
                ExitCode::from(3)
            }
        }
    }
}
