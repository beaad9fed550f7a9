//! The two-stage game-outcome model.
//!
//! Each game `s` gets a relative home strength
//! `lambda = alpha^r1 * beta^r2 * gamma^r3` built from three home/away ratios
//! (win percentage, batting average, starting-pitcher ERA). A latent home-win
//! probability is drawn from `Beta(m * lambda, m)` and the outcome is a
//! Bernoulli trial on it. Integrating the latent stage out gives
//! `P(home win) = lambda / (1 + lambda)` for every `m > 0`, which is what the
//! likelihood uses.

use std::fmt;

use chrono::NaiveDate;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower bound applied to every covariate before a ratio is formed.
pub const COVARIATE_FLOOR: f64 = 1e-3;

/// Team identifier (e.g. `"LAD"`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TeamId(String);

impl TeamId {
    pub fn new(code: impl Into<String>) -> Self {
        TeamId(code.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TeamId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TeamId {
    fn from(s: &str) -> Self {
        TeamId(s.to_owned())
    }
}

/// Home/away strength ratios. Larger is better for the home team in all three.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StrengthRatios {
    /// Home over away win percentage.
    pub alpha: f64,
    /// Home over away batting average.
    pub beta: f64,
    /// Away over home starter ERA (inverted so that a better home starter raises it).
    pub gamma: f64,
}

impl StrengthRatios {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let r = StrengthRatios { alpha, beta, gamma };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!(
                    "{name} must be positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Natural logs of the three ratios, in exponent order.
    pub fn ln(&self) -> [f64; 3] {
        [self.alpha.ln(), self.beta.ln(), self.gamma.ln()]
    }

    /// The same matchup seen from the other side.
    pub fn reciprocal(&self) -> Self {
        StrengthRatios {
            alpha: self.alpha.recip(),
            beta: self.beta.recip(),
            gamma: self.gamma.recip(),
        }
    }
}

/// Contribution exponents and Beta concentration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub r: [f64; 3],
    pub m: f64,
}

impl ModelParams {
    pub fn new(r1: f64, r2: f64, r3: f64, m: f64) -> Result<Self> {
        let p = ModelParams { r: [r1, r2, r3], m };
        p.validate()?;
        Ok(p)
    }

    /// Exponents must be nonnegative and finite, `m` strictly positive.
    pub fn validate(&self) -> Result<()> {
        if let Some(bad) = self.r.iter().find(|r| !(r.is_finite() && **r >= 0.0)) {
            return Err(Error::domain(format!(
                "exponents must be nonnegative, got {bad}"
            )));
        }
        if !(self.m.is_finite() && self.m > 0.0) {
            return Err(Error::domain(format!(
                "concentration m must be positive, got {}",
                self.m
            )));
        }
        Ok(())
    }

    /// Checks the exponents against a `[0, r_max]` prior box.
    pub fn validate_within(&self, r_max: f64) -> Result<()> {
        self.validate()?;
        if self.r.iter().any(|&r| r > r_max) {
            return Err(Error::domain(format!(
                "exponents {:?} exceed prior bound {r_max}",
                self.r
            )));
        }
        Ok(())
    }
}

/// One game's model quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GamePrediction {
    pub lambda: f64,
    pub p: f64,
    pub outcome: Option<bool>,
}

/// Pregame covariates for one side of a game.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TeamStats {
    pub win_pct: f64,
    pub batting_avg: f64,
    pub starter_era: f64,
}

impl TeamStats {
    pub fn validate(&self) -> Result<()> {
        if !(self.win_pct.is_finite() && (0.0..=1.0).contains(&self.win_pct)) {
            return Err(Error::domain(format!(
                "win percentage {} outside [0, 1]",
                self.win_pct
            )));
        }
        if !(self.batting_avg.is_finite() && (0.0..=1.0).contains(&self.batting_avg)) {
            return Err(Error::domain(format!(
                "batting average {} outside [0, 1]",
                self.batting_avg
            )));
        }
        if !(self.starter_era.is_finite() && self.starter_era >= 0.0) {
            return Err(Error::domain(format!(
                "ERA {} must be nonnegative",
                self.starter_era
            )));
        }
        Ok(())
    }
}

/// A historical game with pregame covariates and the observed result.
#[derive(Debug, Clone, PartialEq)]
pub struct GameRecord {
    pub date: NaiveDate,
    pub home_team: TeamId,
    pub away_team: TeamId,
    pub home: TeamStats,
    pub away: TeamStats,
    pub home_won: bool,
    /// Games each side had played earlier in the same season.
    pub home_played: u32,
    pub away_played: u32,
    /// Set when a win percentage had no prior games behind it and was defaulted.
    pub winpct_defaulted: bool,
}

impl GameRecord {
    pub fn validate(&self) -> Result<()> {
        if self.home_team == self.away_team {
            return Err(Error::domain(format!(
                "{} listed as both home and away",
                self.home_team
            )));
        }
        self.home.validate()?;
        self.away.validate()
    }

    pub fn ratios(&self) -> StrengthRatios {
        ratios_from_records(&self.home, &self.away)
    }
}

/// `alpha^r1 * beta^r2 * gamma^r3`.
pub fn compute_lambda(ratios: &StrengthRatios, params: &ModelParams) -> Result<f64> {
    ratios.validate()?;
    params.validate()?;
    let lambda = ratios.alpha.powf(params.r[0])
        * ratios.beta.powf(params.r[1])
        * ratios.gamma.powf(params.r[2]);
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(format!(
            "lambda not representable for {ratios:?} with r = {:?}",
            params.r
        )));
    }
    Ok(lambda)
}

/// Marginal home-win probability `lambda / (1 + lambda)`; does not depend on `m`.
pub fn marginal_home_win_prob(lambda: f64) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    Ok(lambda / (1.0 + lambda))
}

/// One draw of the latent home-win probability from `Beta(m * lambda, m)`.
pub fn draw_latent_prob<R: Rng + ?Sized>(lambda: f64, m: f64, rng: &mut R) -> Result<f64> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    if !(m.is_finite() && m > 0.0) {
        return Err(Error::domain(format!(
            "concentration m must be positive, got {m}"
        )));
    }
    beta_draw(m * lambda, m, rng)
}

/// Posterior shape of the latent probability after observing the outcome:
/// `Beta(m * lambda + x, m + 1 - x)`.
pub fn latent_posterior_shape(lambda: f64, m: f64, home_won: bool) -> (f64, f64) {
    let x = if home_won { 1.0 } else { 0.0 };
    (m * lambda + x, m + 1.0 - x)
}

/// Draws the latent probability conditional on an observed outcome.
pub fn draw_latent_posterior<R: Rng + ?Sized>(
    lambda: f64,
    m: f64,
    home_won: bool,
    rng: &mut R,
) -> Result<f64> {
    if !(lambda > 0.0 && m > 0.0) {
        return Err(Error::domain(format!(
            "invalid latent posterior parameters lambda={lambda}, m={m}"
        )));
    }
    let (a, b) = latent_posterior_shape(lambda, m, home_won);
    beta_draw(a, b, rng)
}

fn beta_draw<R: Rng + ?Sized>(a: f64, b: f64, rng: &mut R) -> Result<f64> {
    let dist = Beta::new(a, b).map_err(|e| Error::domain(format!("Beta({a}, {b}): {e}")))?;
    Ok(dist.sample(rng))
}

/// Bernoulli trial; `true` means the home team won.
pub fn draw_outcome<R: Rng + ?Sized>(p: f64, rng: &mut R) -> Result<bool> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("probability {p} outside [0, 1]")));
    }
    Ok(rng.random_bool(p))
}

/// Forms the three ratios after flooring every covariate at [`COVARIATE_FLOOR`].
pub fn ratios_from_records(home: &TeamStats, away: &TeamStats) -> StrengthRatios {
    let f = |x: f64| x.max(COVARIATE_FLOOR);
    StrengthRatios {
        alpha: f(home.win_pct) / f(away.win_pct),
        beta: f(home.batting_avg) / f(away.batting_avg),
        gamma: f(away.starter_era) / f(home.starter_era),
    }
}

/// `ln(1 + e^x)` without overflow.
#[inline]
pub(crate) fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Log marginal probability of the observed outcome given `eta = ln(lambda)`.
#[inline]
pub(crate) fn outcome_log_prob(eta: f64, home_won: bool) -> f64 {
    if home_won {
        -softplus(-eta)
    } else {
        -softplus(eta)
    }
}

/// Marginal log-likelihood of the observed outcomes; `0` for no games.
pub fn log_likelihood(params: &ModelParams, games: &[GameRecord]) -> Result<f64> {
    params.validate()?;
    let mut total = 0.0;
    for (i, g) in games.iter().enumerate() {
        let ln = g.ratios().ln();
        let eta: f64 = ln.iter().zip(params.r).map(|(l, r)| l * r).sum();
        let term = outcome_log_prob(eta, g.home_won);
        if !term.is_finite() {
            return Err(Error::domain(format!(
                "non-finite likelihood term for game {i} ({} {} at {})",
                g.date, g.away_team, g.home_team
            )));
        }
        total += term;
    }
    Ok(total)
}

/// Full prediction for a game from its ratios.
pub fn predict(ratios: &StrengthRatios, params: &ModelParams) -> Result<GamePrediction> {
    let lambda = compute_lambda(ratios, params)?;
    Ok(GamePrediction {
        lambda,
        p: marginal_home_win_prob(lambda)?,
        outcome: None,
    })
}
