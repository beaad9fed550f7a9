//! Exit codes, input validation and file contracts of the `pennant` binary.

mod support;

use std::fs;

use support::{fixture, pennant, pennant_ok, QUICK_FIT};

fn stderr(out: &std::process::Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn missing_game_log_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = pennant(dir.path(), &["fit", "--out", "never"]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(!dir.path().join("never").exists());
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        pennant(dir.path(), &["simulate", "--bogus"]).status.code(),
        Some(2)
    );
}

#[test]
fn generated_inputs_validate_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), 1, "");
    let stdout = pennant_ok(dir.path(), &["validate", "--config", cfg.to_str().unwrap()]);
    assert!(stdout.contains("no issues found"), "{stdout}");
}

#[test]
fn schedule_with_unknown_team_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), 2, "");
    let sched = dir.path().join("fx/schedule.csv");
    let text = fs::read_to_string(&sched).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_owned).collect();
    let first: Vec<&str> = lines[1].split(',').collect();
    lines[1] = format!("{},XXX,{}", first[0], first[2]);
    fs::write(&sched, lines.join("\n") + "\n").unwrap();
    let out = pennant(dir.path(), &["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("XXX"));
}

#[test]
fn duplicate_division_team_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), 3, "");
    let league = dir.path().join("fx/league.csv");
    let mut text = fs::read_to_string(&league).unwrap();
    text.push_str("AL,East,NYY\n");
    fs::write(&league, text).unwrap();
    let out = pennant(dir.path(), &["validate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("NYY"));
}

#[test]
fn simulate_without_fit_names_the_missing_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), 4, "");
    let out = pennant(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("pennant fit"), "{}", stderr(&out));
}

#[test]
fn report_without_results_names_the_missing_step() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), 5, "");
    let out = pennant(dir.path(), &["report", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(
        stderr(&out).contains("pennant simulate"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn unknown_histogram_team_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(
        dir.path(),
        6,
        "point_exponents = [1.0, 1.0, 0.5]\nsigma_obs = 0.5\nsigma_process = 0.05\n",
    );
    let out = pennant(
        dir.path(),
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--histogram",
            "ZZZ",
        ],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("ZZZ"));
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), 7, "point_exponents = [1.0, 1.0, 0.5]\nsigma_obs = 0.5\nsigma_process = 0.05\nreplications = 40\n");
    let cfg = cfg.to_str().unwrap();
    pennant_ok(
        dir.path(),
        &[
            "simulate",
            "--config",
            cfg,
            "--replications",
            "25",
            "--out",
            "flagged",
        ],
    );
    let meta = fs::read_to_string(dir.path().join("flagged/simulate_meta.txt")).unwrap();
    assert!(meta.contains("replications = 25"), "{meta}");
    pennant_ok(dir.path(), &["simulate", "--config", cfg]);
    let meta = fs::read_to_string(dir.path().join("fx/results/simulate_meta.txt")).unwrap();
    assert!(meta.contains("replications = 40"), "{meta}");
}

#[test]
fn noise_outputs_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = fixture(dir.path(), 8, QUICK_FIT);
    pennant_ok(dir.path(), &["noise", "--config", cfg.to_str().unwrap()]);
    let out = dir.path().join("fx/results");
    let terciles = fs::read_to_string(out.join("terciles.csv")).unwrap();
    let current: Vec<&str> = terciles
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("2025,"))
        .collect();
    assert_eq!(current.len(), 30);
    for group in ["low", "medium", "high"] {
        assert_eq!(
            current.iter().filter(|l| l.ends_with(group)).count(),
            10,
            "{group}"
        );
    }
    let pool = fs::read_to_string(out.join("noise_pool.csv")).unwrap();
    let rows = pool.lines().count() - 1;
    let meta = fs::read_to_string(out.join("noise_meta.txt")).unwrap();
    let converged: usize = meta
        .lines()
        .find_map(|l| l.strip_prefix("windows_pooled = "))
        .expect("windows_pooled in noise_meta.txt")
        .parse()
        .unwrap();
    assert_eq!(rows, converged);
}
