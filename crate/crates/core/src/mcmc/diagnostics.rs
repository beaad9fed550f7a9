//! Convergence diagnostics: split R-hat and effective sample size.

use crate::stats::{mean, sample_variance};

fn split_halves(chains: &[Vec<f64>]) -> Vec<&[f64]> {
    chains
        .iter()
        .flat_map(|c| {
            let half = c.len() / 2;
            // An odd middle element is dropped so both halves match.
            [&c[..half], &c[c.len() - half..]]
        })
        .collect()
}

/// Split R-hat for one parameter.
///
/// Every sequence is split in half and the halves are treated as separate
/// chains. Returns `1.0` when all values are identical, `+inf` when the
/// within-chain variance is zero but chains disagree. The result is floored
/// at `1.0`.
///
/// Panics unless all sequences have equal length of at least 4.
pub fn compute_rhat(chains: &[Vec<f64>]) -> f64 {
    assert!(!chains.is_empty(), "compute_rhat needs at least one chain");
    let len = chains[0].len();
    assert!(len >= 4, "chains must have at least 4 draws");
    assert!(
        chains.iter().all(|c| c.len() == len),
        "chains must have equal length"
    );

    let halves = split_halves(chains);
    let n = halves[0].len() as f64;
    let means: Vec<f64> = halves.iter().map(|h| mean(h)).collect();
    let within = mean(
        &halves
            .iter()
            .map(|h| sample_variance(h))
            .collect::<Vec<_>>(),
    );
    let between_over_n = sample_variance(&means);

    if within == 0.0 {
        return if between_over_n == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
    }
    let var_plus = (n - 1.0) / n * within + between_over_n;
    (var_plus / within).sqrt().max(1.0)
}

fn autocovariance(xs: &[f64], lag: usize, m: f64) -> f64 {
    let n = xs.len();
    xs[..n - lag]
        .iter()
        .zip(&xs[lag..])
        .map(|(a, b)| (a - m) * (b - m))
        .sum::<f64>()
        / n as f64
}

/// Multi-chain effective sample size with Geyer's initial monotone sequence
/// truncation on the combined autocorrelation.
///
/// Returns the total draw count when every value is identical.
pub fn effective_sample_size(chains: &[Vec<f64>]) -> f64 {
    assert!(
        !chains.is_empty(),
        "effective_sample_size needs at least one chain"
    );
    let n = chains.iter().map(Vec::len).min().unwrap_or(0);
    let m = chains.len() as f64;
    if n < 4 {
        return (n as f64) * m;
    }
    let chains: Vec<&[f64]> = chains.iter().map(|c| &c[..n]).collect();
    let means: Vec<f64> = chains.iter().map(|c| mean(c)).collect();
    let variances: Vec<f64> = chains.iter().map(|c| sample_variance(c)).collect();
    let within = mean(&variances);
    let between_over_n = if chains.len() > 1 {
        sample_variance(&means)
    } else {
        0.0
    };
    let nf = n as f64;
    let var_plus = (nf - 1.0) / nf * within + between_over_n;
    if var_plus == 0.0 {
        return nf * m;
    }

    let rho = |lag: usize| -> f64 {
        let acov: f64 = chains
            .iter()
            .zip(&means)
            .map(|(c, &mu)| autocovariance(c, lag, mu))
            .sum::<f64>()
            / m;
        1.0 - (within - acov) / var_plus
    };

    // Sum of autocorrelations over consecutive pairs while the pair sums stay
    // positive, forcing them to be non-increasing.
    let mut tau = -1.0;
    let mut prev_pair = f64::INFINITY;
    let mut lag = 0;
    while lag + 1 < n {
        let mut pair = rho(lag) + rho(lag + 1);
        if pair <= 0.0 {
            break;
        }
        pair = pair.min(prev_pair);
        tau += 2.0 * pair;
        prev_pair = pair;
        lag += 2;
    }
    let total = nf * m;
    total / tau.max(1.0 / total.log10())
}
