//! Random-walk Metropolis sampler over the contribution exponents.
//!
//! The target is the marginal likelihood of the observed outcomes under
//! independent `Uniform(0, r_max)` priors. Proposals leaving the prior box
//! have zero prior density and are rejected without touching the data.

mod diagnostics;
mod trace;

pub use diagnostics::{compute_rhat, effective_sample_size};
pub use trace::{
    export_trace, latent_trace, read_draws_csv, write_draws_csv, write_latent_trace_csv,
    ParamSummary, TraceTable, PARAM_NAMES,
};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{outcome_log_prob, GameRecord, ModelParams};
use crate::rng::{self, derive_seed, tags};

pub const DEFAULT_R_MAX: f64 = 5.0;

/// Independent uniform priors on `[0, r_max]` for each exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorConfig {
    pub r_max: f64,
}

impl Default for PriorConfig {
    fn default() -> Self {
        PriorConfig {
            r_max: DEFAULT_R_MAX,
        }
    }
}

impl PriorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_max.is_finite() && self.r_max > 0.0) {
            return Err(Error::config(format!(
                "r_max must be positive, got {}",
                self.r_max
            )));
        }
        Ok(())
    }

    pub fn contains(&self, r: &[f64; 3]) -> bool {
        r.iter().all(|&x| (0.0..=self.r_max).contains(&x))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    pub n_iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub proposal_std: [f64; 3],
    pub seed: u64,
    /// Starting point; must lie inside the prior box.
    pub init: [f64; 3],
}

impl Default for ChainConfig {
    fn default() -> Self {
        ChainConfig {
            n_iterations: 20_000,
            burn_in: 2_000,
            thin: 5,
            proposal_std: [0.05; 3],
            seed: 0,
            init: [1.0; 3],
        }
    }
}

impl ChainConfig {
    pub fn validate(&self, prior: &PriorConfig) -> Result<()> {
        if self.n_iterations == 0 {
            return Err(Error::config("n_iterations must be positive"));
        }
        if self.burn_in >= self.n_iterations {
            return Err(Error::config(format!(
                "burn_in ({}) must be smaller than n_iterations ({})",
                self.burn_in, self.n_iterations
            )));
        }
        if self.thin == 0 {
            return Err(Error::config("thin must be positive"));
        }
        if let Some(s) = self
            .proposal_std
            .iter()
            .find(|s| !(s.is_finite() && **s > 0.0))
        {
            return Err(Error::config(format!(
                "proposal std must be positive, got {s}"
            )));
        }
        if !prior.contains(&self.init) {
            return Err(Error::config(format!(
                "initial point {:?} outside the prior box",
                self.init
            )));
        }
        Ok(())
    }

    /// Number of draws retained after burn-in and thinning.
    pub fn retained(&self) -> usize {
        (self.n_iterations.saturating_sub(self.burn_in)).div_ceil(self.thin)
    }
}

/// Retained draws of one chain.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorDraws {
    pub chain_id: usize,
    pub draws: Vec<[f64; 3]>,
    pub burn_in: usize,
    pub thin: usize,
    pub accepted: usize,
    pub proposals: usize,
    pub acceptance_rate: f64,
}

impl PosteriorDraws {
    /// Iteration number of the `k`-th retained draw.
    pub fn iteration(&self, k: usize) -> usize {
        self.burn_in + k * self.thin
    }

    /// Values of one exponent in draw order.
    pub fn column(&self, param: usize) -> Vec<f64> {
        self.draws.iter().map(|d| d[param]).collect()
    }

    pub fn mean(&self) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for d in &self.draws {
            for (a, v) in acc.iter_mut().zip(d) {
                *a += v;
            }
        }
        acc.map(|a| a / self.draws.len() as f64)
    }
}

/// Exponent draws pooled across chains, used by the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSample {
    pub draws: Vec<[f64; 3]>,
}

impl PosteriorSample {
    pub fn new(draws: Vec<[f64; 3]>) -> Result<Self> {
        if draws.is_empty() {
            return Err(Error::insufficient("posterior sample has no draws"));
        }
        Ok(PosteriorSample { draws })
    }

    pub fn from_chains(chains: &[PosteriorDraws]) -> Result<Self> {
        Self::new(
            chains
                .iter()
                .flat_map(|c| c.draws.iter().copied())
                .collect(),
        )
    }

    /// A single fixed point, for point-estimate simulation.
    pub fn point(r: [f64; 3]) -> Self {
        PosteriorSample { draws: vec![r] }
    }

    pub fn mean(&self) -> [f64; 3] {
        let mut acc = [0.0; 3];
        for d in &self.draws {
            for (a, v) in acc.iter_mut().zip(d) {
                *a += v;
            }
        }
        acc.map(|a| a / self.draws.len() as f64)
    }

    /// Uniformly chosen draw.
    pub fn pick<R: Rng + ?Sized>(&self, rng: &mut R) -> [f64; 3] {
        self.draws[rng.random_range(0..self.draws.len())]
    }
}

/// Log-ratio design matrix and outcomes, precomputed once per dataset.
#[derive(Debug, Clone)]
pub struct Likelihood {
    features: Vec<[f64; 3]>,
    outcomes: Vec<bool>,
}

impl Likelihood {
    pub fn new(games: &[GameRecord]) -> Result<Self> {
        if games.is_empty() {
            return Err(Error::insufficient("no games to fit"));
        }
        let mut features = Vec::with_capacity(games.len());
        for (i, g) in games.iter().enumerate() {
            g.validate()
                .map_err(|e| Error::domain(format!("game {i}: {e}")))?;
            features.push(g.ratios().ln());
        }
        Ok(Likelihood {
            features,
            outcomes: games.iter().map(|g| g.home_won).collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn log_likelihood(&self, r: &[f64; 3]) -> f64 {
        self.features
            .iter()
            .zip(&self.outcomes)
            .map(|(x, &won)| outcome_log_prob(x[0] * r[0] + x[1] * r[1] + x[2] * r[2], won))
            .sum()
    }
}

/// Runs one Metropolis chain. Deterministic given `cfg.seed`.
pub fn run_chain(
    games: &[GameRecord],
    prior: &PriorConfig,
    cfg: &ChainConfig,
) -> Result<PosteriorDraws> {
    let lik = Likelihood::new(games)?;
    run_chain_on(&lik, prior, cfg, 0)
}

pub(crate) fn run_chain_on(
    lik: &Likelihood,
    prior: &PriorConfig,
    cfg: &ChainConfig,
    chain_id: usize,
) -> Result<PosteriorDraws> {
    prior.validate()?;
    cfg.validate(prior)?;
    if cfg.retained() == 0 {
        return Err(Error::insufficient("no draws survive burn-in and thinning"));
    }
    let mut rng = rng::rng_from_seed(cfg.seed);

    let mut current = cfg.init;
    let mut current_lp = lik.log_likelihood(&current);
    if !current_lp.is_finite() {
        return Err(Error::domain(format!(
            "log-likelihood not finite at start {current:?}"
        )));
    }
    let mut draws = Vec::with_capacity(cfg.retained());
    let mut accepted = 0usize;

    for it in 0..cfg.n_iterations {
        let mut proposal = current;
        for (p, s) in proposal.iter_mut().zip(cfg.proposal_std) {
            let z: f64 = StandardNormal.sample(&mut rng);
            *p += s * z;
        }
        // The uniform is drawn every iteration to keep the stream aligned
        // whether or not the proposal lands inside the box.
        let u: f64 = rng.random();
        if prior.contains(&proposal) {
            let lp = lik.log_likelihood(&proposal);
            if lp.is_finite() && u.ln() < lp - current_lp {
                current = proposal;
                current_lp = lp;
                accepted += 1;
            }
        }
        if it >= cfg.burn_in && (it - cfg.burn_in).is_multiple_of(cfg.thin) {
            draws.push(current);
        }
    }

    Ok(PosteriorDraws {
        chain_id,
        draws,
        burn_in: cfg.burn_in,
        thin: cfg.thin,
        accepted,
        proposals: cfg.n_iterations,
        acceptance_rate: accepted as f64 / cfg.n_iterations as f64,
    })
}

/// Seed used by chain `index` under a base seed.
pub fn chain_seed(base_seed: u64, index: usize) -> u64 {
    derive_seed(derive_seed(base_seed, tags::CHAINS), index as u64)
}

/// Runs `n_chains` independent chains in parallel.
///
/// Chain 0 starts from `base_cfg.init`; the others start at uniform draws over
/// the prior box. Each chain's seed comes from [`chain_seed`], so output does
/// not depend on the thread pool.
pub fn run_chains(
    games: &[GameRecord],
    prior: &PriorConfig,
    base_cfg: &ChainConfig,
    n_chains: usize,
) -> Result<Vec<PosteriorDraws>> {
    if n_chains == 0 {
        return Err(Error::config("n_chains must be at least 1"));
    }
    let lik = Likelihood::new(games)?;
    prior.validate()?;
    (0..n_chains)
        .into_par_iter()
        .map(|k| {
            let cfg = chain_config(base_cfg, prior, k);
            run_chain_on(&lik, prior, &cfg, k)
        })
        .collect()
}

fn chain_config(base: &ChainConfig, prior: &PriorConfig, k: usize) -> ChainConfig {
    let seed = chain_seed(base.seed, k);
    let init = if k == 0 {
        base.init
    } else {
        let mut r = rng::stream(seed, tags::CHAIN_START);
        [0; 3].map(|_| r.random::<f64>() * prior.r_max)
    };
    ChainConfig {
        seed,
        init,
        ..base.clone()
    }
}

/// Acceptance rate the tuning sweep aims for.
pub const TARGET_ACCEPTANCE: f64 = 0.3;

/// Fixed pre-run tuning sweep.
///
/// Runs a short pilot chain for each candidate proposal std (applied to all
/// three coordinates) and returns the candidate whose acceptance rate is
/// closest to [`TARGET_ACCEPTANCE`]. Pilots are independent of each other and
/// of the main run.
pub fn tune_proposal_std(
    games: &[GameRecord],
    prior: &PriorConfig,
    base_cfg: &ChainConfig,
    candidates: &[f64],
    pilot_iterations: usize,
) -> Result<f64> {
    if candidates.is_empty() {
        return Err(Error::config("no candidate proposal widths"));
    }
    let lik = Likelihood::new(games)?;
    let rates: Vec<f64> = candidates
        .par_iter()
        .enumerate()
        .map(|(i, &s)| {
            let cfg = ChainConfig {
                n_iterations: pilot_iterations.max(2),
                burn_in: pilot_iterations.max(2) / 2,
                thin: 1,
                proposal_std: [s; 3],
                seed: derive_seed(derive_seed(base_cfg.seed, tags::TUNING), i as u64),
                init: base_cfg.init,
            };
            run_chain_on(&lik, prior, &cfg, i).map(|d| d.acceptance_rate)
        })
        .collect::<Result<_>>()?;
    let best = rates
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1 - TARGET_ACCEPTANCE)
                .abs()
                .total_cmp(&(b.1 - TARGET_ACCEPTANCE).abs())
        })
        .map(|(i, _)| candidates[i])
        .expect("nonempty candidates");
    log::debug!("proposal tuning: rates {rates:?} -> std {best}");
    Ok(best)
}

/// Default sweep grid for [`tune_proposal_std`].
pub const DEFAULT_TUNING_GRID: [f64; 10] = [0.01, 0.02, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0, 2.0, 3.0];

/// Exponents whose posterior mean sits within 2% of the prior bound.
pub fn boundary_warnings(means: &[f64; 3], prior: &PriorConfig) -> Vec<usize> {
    (0..3).filter(|&i| means[i] >= 0.98 * prior.r_max).collect()
}

/// Posterior mean as a model parameter set with concentration `m`.
pub fn posterior_mean_params(sample: &PosteriorSample, m: f64) -> Result<ModelParams> {
    let r = sample.mean();
    ModelParams::new(r[0], r[1], r[2], m)
}
