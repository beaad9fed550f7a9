//! Oracles and process helpers shared by the CLI test targets.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use pennant_core::model::GameRecord;

/// Posterior means of the exponents on a midpoint lattice over `[0, r_max]^3`
/// under a flat prior, with the likelihood written out directly.
pub fn grid_posterior_means(games: &[GameRecord], r_max: f64, points: usize) -> [f64; 3] {
    let floor = |x: f64| x.max(1e-3);
    let logs: Vec<([f64; 3], bool)> = games
        .iter()
        .map(|g| {
            (
                [
                    (floor(g.home.win_pct) / floor(g.away.win_pct)).ln(),
                    (floor(g.home.batting_avg) / floor(g.away.batting_avg)).ln(),
                    (floor(g.away.starter_era) / floor(g.home.starter_era)).ln(),
                ],
                g.home_won,
            )
        })
        .collect();
    let h = r_max / points as f64;
    let axis: Vec<f64> = (0..points).map(|i| (i as f64 + 0.5) * h).collect();
    let mut cells = Vec::with_capacity(points.pow(3));
    for &a in &axis {
        for &b in &axis {
            for &c in &axis {
                // log P(win) = -ln(1 + exp(-eta)); log P(loss) = -ln(1 + exp(eta)).
                let ll: f64 = logs
                    .iter()
                    .map(|(x, won)| {
                        let eta = a * x[0] + b * x[1] + c * x[2];
                        let z = if *won { -eta } else { eta };
                        -(z.max(0.0) + (-z.abs()).exp().ln_1p())
                    })
                    .sum();
                cells.push(([a, b, c], ll));
            }
        }
    }
    let top = cells.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
    let mut num = [0.0; 3];
    let mut den = 0.0;
    for (r, ll) in &cells {
        let w = (ll - top).exp();
        den += w;
        for k in 0..3 {
            num[k] += w * r[k];
        }
    }
    num.map(|v| v / den)
}

/// Kolmogorov–Smirnov distance between a sample and `Uniform(0, upper)`.
pub fn ks_uniform(sample: &[f64], upper: f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, x)| {
            let f = (x / upper).clamp(0.0, 1.0);
            ((i + 1) as f64 / n - f).max(f - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_pennant")
}

pub fn pennant(cwd: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .current_dir(cwd)
        .env("RUST_LOG", "error")
        .output()
        .expect("spawn pennant")
}

/// Runs a command that must succeed and returns its stdout.
pub fn pennant_ok(cwd: &Path, args: &[&str]) -> String {
    let out = pennant(cwd, args);
    assert!(
        out.status.success(),
        "pennant {args:?} exited {:?}\nstdout:\n{}\nstderr:\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 stdout")
}

/// Fast fitting settings appended to a generated config.
pub const QUICK_FIT: &str =
    "iterations = 3000\nburn_in = 500\nthin = 2\nchains = 2\nreplications = 200\n";

/// Generates a fixture league in `dir/fx` and returns the config path.
pub fn fixture(dir: &Path, seed: u64, extra: &str) -> PathBuf {
    pennant_ok(
        dir,
        &[
            "generate",
            "--out",
            "fx",
            "--seed",
            &seed.to_string(),
            "--with-schedule",
        ],
    );
    let cfg = dir.join("fx/pennant.toml");
    let mut text = fs::read_to_string(&cfg).unwrap();
    text.push_str(extra);
    fs::write(&cfg, text).unwrap();
    cfg
}

/// Every file under `root`, keyed by relative path.
pub fn snapshot(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(
                    p.strip_prefix(root).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                );
            }
        }
    }
    out
}

pub fn report(criterion: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "criterion {criterion} [{name}]: {} ({detail})",
        if pass { "PASS" } else { "FAIL" }
    );
}
