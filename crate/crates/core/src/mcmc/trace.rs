//! Tabular trace export and the draws file.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::mcmc::PosteriorDraws;
use crate::model::{compute_lambda, draw_latent_posterior, GameRecord, ModelParams};
use crate::rng::rng_from_seed;
use crate::stats;

pub const PARAM_NAMES: [&str; 3] = ["r1", "r2", "r3"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSummary {
    pub mean: f64,
    pub sd: f64,
    pub q05: f64,
    pub q95: f64,
}

impl ParamSummary {
    pub fn of(values: &[f64]) -> Self {
        let q = stats::quantiles(values, &[0.05, 0.95]);
        ParamSummary {
            mean: stats::mean(values),
            sd: stats::sample_std(values),
            q05: q[0],
            q95: q[1],
        }
    }
}

/// Row-per-iteration trace plus per-parameter summaries.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    pub rows: Vec<(usize, [f64; 3])>,
    pub summary: [ParamSummary; 3],
}

pub fn export_trace(draws: &PosteriorDraws) -> Result<TraceTable> {
    if draws.draws.is_empty() {
        return Err(Error::insufficient("cannot export an empty trace"));
    }
    let rows = draws
        .draws
        .iter()
        .enumerate()
        .map(|(k, d)| (draws.iteration(k), *d))
        .collect();
    let summary = [0, 1, 2].map(|p| ParamSummary::of(&draws.column(p)));
    Ok(TraceTable { rows, summary })
}

impl TraceTable {
    /// Writes `iteration,r1,r2,r3` rows.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iteration", "r1", "r2", "r3"])?;
        for (it, r) in &self.rows {
            out.write_record([
                it.to_string(),
                r[0].to_string(),
                r[1].to_string(),
                r[2].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Latent home-win probability of one game reconstructed at every retained
/// draw, sampled from its posterior given the observed outcome.
pub fn latent_trace(
    game: &GameRecord,
    draws: &PosteriorDraws,
    m: f64,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    let ratios = game.ratios();
    let mut rng = rng_from_seed(seed);
    draws
        .draws
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let lambda = compute_lambda(&ratios, &ModelParams { r: *r, m })?;
            Ok((
                draws.iteration(k),
                draw_latent_posterior(lambda, m, game.home_won, &mut rng)?,
            ))
        })
        .collect()
}

pub fn write_latent_trace_csv<W: Write>(trace: &[(usize, f64)], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["iteration", "p"])?;
    for (it, p) in trace {
        out.write_record([it.to_string(), p.to_string()])?;
    }
    out.flush()?;
    Ok(())
}

/// Writes every chain's draws as `chain,iteration,r1,r2,r3`.
pub fn write_draws_csv<W: Write>(chains: &[PosteriorDraws], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["chain", "iteration", "r1", "r2", "r3"])?;
    for c in chains {
        for (k, r) in c.draws.iter().enumerate() {
            out.write_record([
                c.chain_id.to_string(),
                c.iteration(k).to_string(),
                r[0].to_string(),
                r[1].to_string(),
                r[2].to_string(),
            ])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads the exponent triples back from a draws file, in file order.
pub fn read_draws_csv<R: Read>(r: R, source_name: &str) -> Result<Vec<[f64; 3]>> {
    let mut rdr = csv::Reader::from_reader(r);
    let headers = rdr.headers()?.clone();
    let idx = |name: &str| {
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
    let cols = [idx("r1")?, idx("r2")?, idx("r3")?];
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let mut r = [0.0; 3];
        for (slot, (&c, name)) in r.iter_mut().zip(cols.iter().zip(PARAM_NAMES)) {
            *slot = rec
                .get(c)
                .unwrap_or("")
                .trim()
                .parse()
                .map_err(|e| Error::Parse {
                    source_name: source_name.to_owned(),
                    row: i + 2,
                    column: name.to_owned(),
                    message: format!("{e}"),
                })?;
        }
        out.push(r);
    }
    Ok(out)
}
