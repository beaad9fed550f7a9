//! Maximum-likelihood noise estimation over sliding windows, and the
//! per-tercile pools that simulation samples from.

use std::io::{Read, Write};

use rand::Rng;
use rayon::prelude::*;

use super::kalman::{filter_series, KalmanState, NoiseParams};
use super::terciles::Tercile;
use crate::error::{Error, Result};
use crate::model::TeamId;
use crate::optim::NelderMead;
use crate::stats;

pub const MIN_WINDOW: usize = 10;
/// Search range for each noise standard deviation.
pub const SIGMA_BOUNDS: (f64, f64) = (1e-4, 10.0);
/// Diffuse initial variance, as a multiple of the window's sample variance.
const DIFFUSE_SCALE: f64 = 10.0;

/// Result of fitting one window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseFit {
    pub params: NoiseParams,
    pub log_likelihood: f64,
    pub converged: bool,
    /// The window had no variation; both sigmas are reported as zero.
    pub degenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseEstimate {
    pub team: TeamId,
    pub window_start: usize,
    pub params: NoiseParams,
    pub converged: bool,
    pub degenerate: bool,
}

fn window_log_likelihood(window: &[f64], init: &KalmanState, noise: &NoiseParams) -> f64 {
    match filter_series(init, window, noise) {
        // The first observation seeds the diffuse prior, so its innovation
        // carries no information.
        Ok(out) => out.log_likelihood(window, noise, 1),
        Err(_) => f64::NEG_INFINITY,
    }
}

/// Fits `(sigma_obs, sigma_process)` by maximising the one-step-ahead
/// prediction-error likelihood of the local-level model.
///
/// The search runs over `ln sigma` within [`SIGMA_BOUNDS`] from three starts
/// and keeps the best optimum.
pub fn estimate_noise(window: &[f64]) -> Result<NoiseFit> {
    if window.len() < MIN_WINDOW {
        return Err(Error::insufficient(format!(
            "noise window needs at least {MIN_WINDOW} values, got {}",
            window.len()
        )));
    }
    if let Some(bad) = window.iter().find(|y| !y.is_finite()) {
        return Err(Error::domain(format!("non-finite ERA observation {bad}")));
    }
    let var = stats::sample_variance(window);
    if var <= f64::EPSILON * window[0].abs().max(1.0) {
        return Ok(NoiseFit {
            params: NoiseParams {
                sigma_obs: 0.0,
                sigma_process: 0.0,
            },
            log_likelihood: f64::NAN,
            converged: false,
            degenerate: true,
        });
    }
    let init = KalmanState {
        mean: window[0],
        variance: DIFFUSE_SCALE * var,
    };
    let objective = |theta: &[f64]| {
        let noise = NoiseParams {
            sigma_obs: theta[0].exp(),
            sigma_process: theta[1].exp(),
        };
        -window_log_likelihood(window, &init, &noise)
    };

    let lb = (SIGMA_BOUNDS.0.ln(), SIGMA_BOUNDS.1.ln());
    let ln_sd = var.sqrt().ln().clamp(lb.0 + 0.1, lb.1 - 0.1);
    let starts = [
        [ln_sd, ln_sd - 10f64.ln()],
        [ln_sd - 0.5 * 2f64.ln(), ln_sd - 0.5 * 2f64.ln()],
        [ln_sd, ln_sd - 100f64.ln()],
    ];
    let nm = NelderMead::default();
    let best = starts
        .iter()
        .map(|s| {
            nm.minimize(
                objective,
                &[s[0].max(lb.0 + 0.1), s[1].max(lb.0 + 0.1)],
                &[lb, lb],
            )
        })
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("three starts");

    Ok(NoiseFit {
        params: NoiseParams {
            sigma_obs: best.x[0].exp(),
            sigma_process: best.x[1].exp(),
        },
        log_likelihood: -best.value,
        converged: best.converged && best.value.is_finite(),
        degenerate: false,
    })
}

/// Fits every contiguous window of length `window_len` (stride 1).
pub fn sliding_noise_estimates(
    team: &TeamId,
    series: &[f64],
    window_len: usize,
) -> Result<Vec<NoiseEstimate>> {
    if window_len < MIN_WINDOW {
        return Err(Error::config(format!(
            "window length must be at least {MIN_WINDOW}"
        )));
    }
    if series.len() < window_len {
        return Err(Error::insufficient(format!(
            "{team}: series of {} games is shorter than the {window_len}-game window",
            series.len()
        )));
    }
    (0..=series.len() - window_len)
        .into_par_iter()
        .map(|start| {
            let fit = estimate_noise(&series[start..start + window_len])?;
            Ok(NoiseEstimate {
                team: team.clone(),
                window_start: start,
                params: fit.params,
                converged: fit.converged,
                degenerate: fit.degenerate,
            })
        })
        .collect()
}

/// A window estimate tagged with the tercile and season it was pooled under.
#[derive(Debug, Clone, PartialEq)]
pub struct PooledEstimate {
    pub estimate: NoiseEstimate,
    pub season: i32,
    pub tercile: Tercile,
}

/// Converged noise pairs grouped by tercile.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NoisePools {
    pub low: Vec<NoiseParams>,
    pub medium: Vec<NoiseParams>,
    pub high: Vec<NoiseParams>,
}

impl NoisePools {
    /// Keeps converged, non-degenerate estimates only.
    pub fn from_estimates<'a>(rows: impl IntoIterator<Item = &'a PooledEstimate>) -> Self {
        let mut pools = NoisePools::default();
        for r in rows {
            if r.estimate.converged && !r.estimate.degenerate {
                pools.group_mut(r.tercile).push(r.estimate.params);
            }
        }
        pools
    }

    pub fn group(&self, tercile: Tercile) -> &[NoiseParams] {
        match tercile {
            Tercile::Low => &self.low,
            Tercile::Medium => &self.medium,
            Tercile::High => &self.high,
        }
    }

    fn group_mut(&mut self, tercile: Tercile) -> &mut Vec<NoiseParams> {
        match tercile {
            Tercile::Low => &mut self.low,
            Tercile::Medium => &mut self.medium,
            Tercile::High => &mut self.high,
        }
    }
}

/// Uniformly resamples one `(sigma_obs, sigma_process)` pair from a tercile's pool.
pub fn sample_noise<R: Rng + ?Sized>(
    group: Tercile,
    pools: &NoisePools,
    rng: &mut R,
) -> Result<NoiseParams> {
    let pool = pools.group(group);
    if pool.is_empty() {
        return Err(Error::insufficient(format!(
            "no converged noise estimates in the {group} tercile"
        )));
    }
    Ok(pool[rng.random_range(0..pool.len())])
}

const POOL_HEADER: [&str; 7] = [
    "team",
    "window_start",
    "sigma_obs",
    "sigma_process",
    "converged",
    "season",
    "tercile",
];

pub fn write_pool_csv<W: Write>(rows: &[PooledEstimate], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(POOL_HEADER)?;
    for r in rows {
        let e = &r.estimate;
        out.write_record([
            e.team.to_string(),
            e.window_start.to_string(),
            e.params.sigma_obs.to_string(),
            e.params.sigma_process.to_string(),
            e.converged.to_string(),
            r.season.to_string(),
            r.tercile.to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_pool_csv<R: Read>(r: R, source_name: &str) -> Result<Vec<PooledEstimate>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let perr = |row: usize, column: &str, message: String| Error::Parse {
        source_name: source_name.to_owned(),
        row,
        column: column.to_owned(),
        message,
    };
    let mut idx = [0usize; 7];
    for (slot, name) in idx.iter_mut().zip(POOL_HEADER) {
        *slot = headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| perr(1, name, "missing column".into()))?;
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = i + 2;
        let field = |k: usize| rec.get(idx[k]).unwrap_or("").trim();
        let num = |k: usize| {
            field(k)
                .parse::<f64>()
                .map_err(|e| perr(row, POOL_HEADER[k], e.to_string()))
        };
        let params = NoiseParams::new(num(2)?, num(3)?)
            .map_err(|e| perr(row, "sigma_obs", e.to_string()))?;
        rows.push(PooledEstimate {
            estimate: NoiseEstimate {
                team: TeamId::new(field(0)),
                window_start: field(1).parse().map_err(|e: std::num::ParseIntError| {
                    perr(row, "window_start", e.to_string())
                })?,
                params,
                converged: field(4)
                    .parse()
                    .map_err(|e: std::str::ParseBoolError| perr(row, "converged", e.to_string()))?,
                degenerate: params.sigma_obs == 0.0 && params.sigma_process == 0.0,
            },
            season: field(5)
                .parse()
                .map_err(|e: std::num::ParseIntError| perr(row, "season", e.to_string()))?,
            tercile: field(6)
                .parse()
                .map_err(|e: Error| perr(row, "tercile", e.to_string()))?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_from_seed;
    use rand_distr::{Distribution, Normal};

    #[test]
    fn constant_window_is_degenerate() {
        let fit = estimate_noise(&[3.5; 30]).unwrap();
        assert!(fit.degenerate);
        assert!(fit.params.sigma_obs < 1e-6 && fit.params.sigma_process < 1e-6);
        assert!(!fit.converged);
    }

    #[test]
    fn short_window_errors() {
        assert!(estimate_noise(&[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn white_noise_is_all_observation_noise() {
        let v: f64 = 0.64;
        let mut rng = rng_from_seed(31);
        let normal = Normal::new(4.0, v.sqrt()).unwrap();
        let y: Vec<f64> = (0..1000).map(|_| normal.sample(&mut rng)).collect();
        let fit = estimate_noise(&y).unwrap();
        let obs_var = fit.params.obs_variance();
        assert!((obs_var / v - 1.0).abs() < 0.15, "{obs_var}");
        assert!(fit.params.process_variance() < 0.05 * v, "{:?}", fit.params);
        assert!(fit.converged);
    }

    #[test]
    fn random_walk_is_all_process_noise() {
        let mut rng = rng_from_seed(32);
        let normal = Normal::new(0.0, 0.3).unwrap();
        let mut x = 4.0;
        let y: Vec<f64> = (0..500)
            .map(|_| {
                x += normal.sample(&mut rng);
                x
            })
            .collect();
        let fit = estimate_noise(&y).unwrap();
        assert!(
            (fit.params.sigma_process / 0.3 - 1.0).abs() < 0.15,
            "{:?}",
            fit.params
        );
        assert!(fit.params.sigma_obs < 0.1, "{:?}", fit.params);
    }

    #[test]
    fn sliding_window_counts() {
        let team = TeamId::new("SEA");
        let mut rng = rng_from_seed(33);
        let normal = Normal::new(4.0, 0.5).unwrap();
        let y: Vec<f64> = (0..40).map(|_| normal.sample(&mut rng)).collect();
        assert_eq!(
            sliding_noise_estimates(&team, &y[..30], 30).unwrap().len(),
            1
        );
        let all = sliding_noise_estimates(&team, &y, 30).unwrap();
        assert_eq!(all.len(), 11);
        assert!(all.iter().enumerate().all(|(i, e)| e.window_start == i));
        assert!(sliding_noise_estimates(&team, &y[..20], 30).is_err());
    }

    fn pooled(sigma_obs: f64, tercile: Tercile, converged: bool) -> PooledEstimate {
        PooledEstimate {
            estimate: NoiseEstimate {
                team: TeamId::new("T"),
                window_start: 0,
                params: NoiseParams {
                    sigma_obs,
                    sigma_process: 0.01,
                },
                converged,
                degenerate: false,
            },
            season: 2024,
            tercile,
        }
    }

    #[test]
    fn pools_exclude_non_converged() {
        let rows = vec![
            pooled(0.5, Tercile::Low, true),
            pooled(0.6, Tercile::Low, false),
            pooled(0.7, Tercile::High, true),
        ];
        let pools = NoisePools::from_estimates(&rows);
        assert_eq!(pools.low.len(), 1);
        assert!(pools.medium.is_empty());
        assert_eq!(pools.high.len(), 1);
        assert!(sample_noise(Tercile::Medium, &pools, &mut rng_from_seed(1)).is_err());
    }

    #[test]
    fn singleton_pool_always_returns_its_pair() {
        let pools = NoisePools::from_estimates(&[pooled(0.42, Tercile::Medium, true)]);
        let mut rng = rng_from_seed(2);
        for _ in 0..100 {
            assert_eq!(
                sample_noise(Tercile::Medium, &pools, &mut rng)
                    .unwrap()
                    .sigma_obs,
                0.42
            );
        }
    }

    #[test]
    fn pool_file_round_trip() {
        let rows = vec![
            pooled(0.5, Tercile::Low, true),
            pooled(0.25, Tercile::High, false),
        ];
        let mut buf = Vec::new();
        write_pool_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text
            .starts_with("team,window_start,sigma_obs,sigma_process,converged,season,tercile\n"));
        assert_eq!(read_pool_csv(buf.as_slice(), "mem").unwrap(), rows);
    }
}
