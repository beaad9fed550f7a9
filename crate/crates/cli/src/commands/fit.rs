use std::io::Write;

use anyhow::Result;
use log::{info, warn};
use pennant_core::ingest::{derive_pregame_records, filter_training_window};
use pennant_core::mcmc::{
    boundary_warnings, compute_rhat, effective_sample_size, export_trace, latent_trace, run_chains,
    tune_proposal_std, write_draws_csv, write_latent_trace_csv, ParamSummary, DEFAULT_TUNING_GRID,
    PARAM_NAMES,
};
use pennant_core::rng::derive_seed;

use crate::config::Settings;
use crate::data::{create, load_league, load_rows, write_meta, InvalidInput, SeasonSplit};
use crate::Outcome;

const PILOT_ITERATIONS: usize = 2_000;
/// Stream for the per-game latent probability trace.
const LATENT_TRACE_TAG: u64 = 0x4c41_5445_4e54;
pub const RHAT_LIMIT: f64 = 1.1;

pub fn run(s: &Settings) -> Result<Outcome> {
    let log_path = s.require_game_log()?;
    let league = load_league(s)?;
    let split = SeasonSplit::new(load_rows(log_path, &league)?);
    let records =
        derive_pregame_records(split.training()).map_err(|e| InvalidInput(e.to_string()))?;
    let train = filter_training_window(&records, &s.filter);
    if train.is_empty() {
        return Err(InvalidInput(format!(
            "no training games remain after filtering {} records",
            records.len()
        ))
        .into());
    }
    info!("fitting on {} of {} games", train.len(), records.len());

    let mut chain = s.chain.clone();
    if s.tune_proposal {
        let std = tune_proposal_std(
            &train,
            &s.prior,
            &chain,
            &DEFAULT_TUNING_GRID,
            PILOT_ITERATIONS,
        )?;
        chain.proposal_std = [std; 3];
    }
    let chains = run_chains(&train, &s.prior, &chain, s.chains)?;

    s.create_out_dir()?;
    write_draws_csv(&chains, create(&s.out_file("draws.csv"))?)?;
    for c in &chains {
        export_trace(c)?.write_csv(create(
            &s.out_file(&format!("trace_chain{}.csv", c.chain_id)),
        )?)?;
    }
    let latent = latent_trace(
        &train[0],
        &chains[0],
        s.sim.m,
        derive_seed(s.seed, LATENT_TRACE_TAG),
    )?;
    write_latent_trace_csv(&latent, create(&s.out_file("trace_latent.csv"))?)?;

    let mut diag = create(&s.out_file("diagnostics.csv"))?;
    writeln!(diag, "parameter,mean,sd,q05,q95,rhat,ess")?;
    let mut worst_rhat: f64 = 1.0;
    let mut means = [0.0; 3];
    let mut table = String::from("param      mean      sd     q05     q95   R-hat      ESS\n");
    for (p, name) in PARAM_NAMES.iter().enumerate() {
        let cols: Vec<Vec<f64>> = chains.iter().map(|c| c.column(p)).collect();
        let all: Vec<f64> = cols.concat();
        let sum = ParamSummary::of(&all);
        let (rhat, ess) = (compute_rhat(&cols), effective_sample_size(&cols));
        worst_rhat = if rhat.is_nan() {
            f64::INFINITY
        } else {
            worst_rhat.max(rhat)
        };
        means[p] = sum.mean;
        writeln!(
            diag,
            "{name},{},{},{},{},{rhat},{ess}",
            sum.mean, sum.sd, sum.q05, sum.q95
        )?;
        table.push_str(&format!(
            "{name:<5} {:>9.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>8.1}\n",
            sum.mean, sum.sd, sum.q05, sum.q95, rhat, ess
        ));
    }
    diag.flush()?;

    let mut meta = vec![
        ("seed", s.seed.to_string()),
        ("games_total", records.len().to_string()),
        ("games_used", train.len().to_string()),
        (
            "filter",
            format!(
                "{}..{} min_games_played={}",
                s.filter.start, s.filter.end, s.filter.min_games_played
            ),
        ),
        ("r_max", s.prior.r_max.to_string()),
        ("m", s.sim.m.to_string()),
        ("iterations", chain.n_iterations.to_string()),
        ("burn_in", chain.burn_in.to_string()),
        ("thin", chain.thin.to_string()),
        ("proposal_std", chain.proposal_std[0].to_string()),
        ("proposal_tuned", s.tune_proposal.to_string()),
        ("chains", chains.len().to_string()),
    ];
    let keys: Vec<(String, String)> = chains
        .iter()
        .flat_map(|c| {
            let k = c.chain_id;
            [
                (
                    format!("chain{k}_seed"),
                    pennant_core::mcmc::chain_seed(s.seed, k).to_string(),
                ),
                (
                    format!("chain{k}_acceptance"),
                    c.acceptance_rate.to_string(),
                ),
            ]
        })
        .collect();
    meta.extend(keys.iter().map(|(k, v)| (k.as_str(), v.clone())));
    write_meta(&s.out_file("fit_meta.txt"), &meta)?;

    print!("{table}");
    for c in &chains {
        println!("chain {} acceptance {:.3}", c.chain_id, c.acceptance_rate);
    }
    for p in boundary_warnings(&means, &s.prior) {
        warn!(
            "posterior mean of {} is near r_max = {}; consider widening the prior",
            PARAM_NAMES[p], s.prior.r_max
        );
    }
    if worst_rhat > RHAT_LIMIT {
        warn!("split R-hat {worst_rhat:.3} exceeds {RHAT_LIMIT}; chains have not converged");
        return Ok(Outcome::Flagged);
    }
    Ok(Outcome::Clean)
}
