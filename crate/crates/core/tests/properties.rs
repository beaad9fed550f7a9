use std::collections::{BTreeMap, BTreeSet};

use chrono::{Datelike, NaiveDate};
use pennant_core::ingest::{
    derive_pregame_records, filter_training_window, parse_game_log, write_game_log, DatasetFilter,
    MonthDay, RawGameRow,
};
use pennant_core::model::{
    compute_lambda, log_likelihood, marginal_home_win_prob, ratios_from_records, GameRecord,
    ModelParams, StrengthRatios, TeamId, TeamStats,
};
use pennant_core::rng::rng_from_seed;
use pennant_core::season::{playoff_qualifiers, LeagueStructure, PlayoffFormat};
use proptest::prelude::*;

fn team_stats() -> impl Strategy<Value = TeamStats> {
    (0.0f64..=1.0, 0.1f64..0.4, 0.0f64..12.0).prop_map(|(w, b, e)| TeamStats {
        win_pct: w,
        batting_avg: b,
        starter_era: e,
    })
}

fn exponents() -> impl Strategy<Value = [f64; 3]> {
    [0.0f64..5.0, 0.0f64..5.0, 0.0f64..5.0]
}

fn game() -> impl Strategy<Value = GameRecord> {
    (team_stats(), team_stats(), any::<bool>()).prop_map(|(home, away, home_won)| GameRecord {
        date: NaiveDate::from_ymd_opt(2024, 6, 1).unwrap(),
        home_team: "H".into(),
        away_team: "A".into(),
        home,
        away,
        home_won,
        home_played: 60,
        away_played: 60,
        winpct_defaulted: false,
    })
}

proptest! {
    #[test]
    fn swapping_sides_inverts_lambda(home in team_stats(), away in team_stats(), r in 0.0f64..5.0) {
        let params = ModelParams::new(r, r, r, 1.0).unwrap();
        let fwd = ratios_from_records(&home, &away);
        let back = ratios_from_records(&away, &home);
        prop_assert!((fwd.alpha * back.alpha - 1.0).abs() < 1e-12);
        prop_assert!((fwd.beta * back.beta - 1.0).abs() < 1e-12);
        prop_assert!((fwd.gamma * back.gamma - 1.0).abs() < 1e-12);
        let (l1, l2) = (compute_lambda(&fwd, &params).unwrap(), compute_lambda(&back, &params).unwrap());
        prop_assert!((l1 * l2 - 1.0).abs() < 1e-9);
        let (p1, p2) = (marginal_home_win_prob(l1).unwrap(), marginal_home_win_prob(l2).unwrap());
        prop_assert!((p1 + p2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn lambda_increases_in_each_ratio(
        base in [0.2f64..5.0, 0.2f64..5.0, 0.2f64..5.0],
        r in [0.01f64..5.0, 0.01f64..5.0, 0.01f64..5.0],
        which in 0usize..3,
        bump in 1.01f64..3.0,
    ) {
        let params = ModelParams::new(r[0], r[1], r[2], 1.0).unwrap();
        let lo = StrengthRatios::new(base[0], base[1], base[2]).unwrap();
        let mut raised = base;
        raised[which] *= bump;
        let hi = StrengthRatios::new(raised[0], raised[1], raised[2]).unwrap();
        let (a, b) = (compute_lambda(&lo, &params).unwrap(), compute_lambda(&hi, &params).unwrap());
        prop_assert!(b > a);
        prop_assert!(marginal_home_win_prob(b).unwrap() > marginal_home_win_prob(a).unwrap());
    }

    #[test]
    fn log_likelihood_is_additive(
        a in prop::collection::vec(game(), 0..40),
        b in prop::collection::vec(game(), 0..40),
        r in exponents(),
    ) {
        let params = ModelParams::new(r[0], r[1], r[2], 1.0).unwrap();
        let both: Vec<_> = a.iter().chain(&b).cloned().collect();
        let (la, lb, lab) = (log_likelihood(&params, &a).unwrap(), log_likelihood(&params, &b).unwrap(), log_likelihood(&params, &both).unwrap());
        prop_assert!((lab - (la + lb)).abs() <= 1e-9 * lab.abs().max(1.0));
    }
}

const TEAMS: [&str; 6] = ["ATL", "BOS", "CHC", "DET", "HOU", "NYY"];

fn raw_rows(explicit: bool) -> impl Strategy<Value = Vec<RawGameRow>> {
    let row = (
        0u32..200,
        0usize..6,
        1usize..6,
        any::<bool>(),
        (0.0f64..=1.0, 0.0f64..=1.0),
        (0.1f64..0.4, 0.1f64..0.4),
        (0.0f64..15.0, 0.0f64..15.0),
    );
    prop::collection::vec(row, 0..60).prop_map(move |rows| {
        let mut out: Vec<RawGameRow> = rows
            .into_iter()
            .map(|(day, h, off, home_won, wp, avg, era)| RawGameRow {
                row: 0,
                date: NaiveDate::from_ymd_opt(2023, 4, 1).unwrap()
                    + chrono::Days::new(day as u64 * 3),
                home: TEAMS[h].into(),
                away: TEAMS[(h + off) % 6].into(),
                home_won,
                runs: None,
                winpct_pre: explicit.then_some(wp),
                home_avg_pre: avg.0,
                away_avg_pre: avg.1,
                home_era_pre: era.0,
                away_era_pre: era.1,
            })
            .collect();
        out.sort_by_key(|r| r.date);
        for (i, r) in out.iter_mut().enumerate() {
            r.row = i + 2;
        }
        out
    })
}

proptest! {
    #[test]
    fn game_log_round_trips(rows in any::<bool>().prop_flat_map(raw_rows)) {
        let mut buf = Vec::new();
        write_game_log(&rows, &mut buf).unwrap();
        let known: BTreeSet<TeamId> = TEAMS.iter().map(|&t| t.into()).collect();
        let back = parse_game_log(buf.as_slice(), "mem", Some(&known)).unwrap();
        prop_assert_eq!(back, rows);
    }

    #[test]
    fn derived_win_pct_tracks_cumulative_record(rows in raw_rows(false)) {
        let records = derive_pregame_records(&rows).unwrap();
        let mut tally: BTreeMap<(i32, TeamId), (u32, u32)> = BTreeMap::new();
        for (raw, rec) in rows.iter().zip(&records) {
            for (team, stats) in [(&raw.home, &rec.home), (&raw.away, &rec.away)] {
                prop_assert!((0.0..=1.0).contains(&stats.win_pct));
                let (w, l) = tally.get(&(raw.season(), team.clone())).copied().unwrap_or_default();
                let expect = if w + l == 0 { 0.5 } else { w as f64 / (w + l) as f64 };
                prop_assert_eq!(stats.win_pct, expect);
            }
            let (winner, loser) = if raw.home_won { (&raw.home, &raw.away) } else { (&raw.away, &raw.home) };
            tally.entry((raw.season(), winner.clone())).or_default().0 += 1;
            tally.entry((raw.season(), loser.clone())).or_default().1 += 1;
        }
    }

    #[test]
    fn training_filter_is_idempotent_and_ordered(
        rows in raw_rows(false),
        start in (4u32..7, 1u32..29),
        len in 0u32..120,
        min_games in 0u32..20,
    ) {
        let records = derive_pregame_records(&rows).unwrap();
        let s = MonthDay::new(start.0, start.1).unwrap();
        let end_date = NaiveDate::from_ymd_opt(2023, s.month, s.day).unwrap() + chrono::Days::new(len as u64);
        let e = if end_date.year() == 2023 { MonthDay::of(end_date) } else { MonthDay::new(12, 31).unwrap() };
        let filter = DatasetFilter { start: s, end: e, min_games_played: min_games };
        let once = filter_training_window(&records, &filter);
        prop_assert_eq!(filter_training_window(&once, &filter), once.clone());
        let mut it = records.iter();
        for kept in &once {
            prop_assert!(it.any(|r| r == kept), "order not preserved");
        }
    }
}

/// Every size-`k` subset of `n` items, as index lists.
fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
        .collect()
}

/// The unique qualifier set consistent with the rule, found by checking
/// every candidate set: it holds each division's best team, and each
/// remaining member beats every team left out.
fn brute_force_qualifiers(
    wins: &BTreeMap<TeamId, u32>,
    league: &LeagueStructure,
    wild_cards: usize,
) -> BTreeSet<TeamId> {
    let mut all = BTreeSet::new();
    for l in &league.leagues {
        let teams: Vec<&TeamId> = l.teams().collect();
        let leaders: BTreeSet<&TeamId> = l
            .divisions
            .iter()
            .map(|d| d.teams.iter().max_by_key(|t| wins[*t]).unwrap())
            .collect();
        let valid: Vec<BTreeSet<&TeamId>> = subsets(teams.len(), l.divisions.len() + wild_cards)
            .into_iter()
            .map(|idx| idx.into_iter().map(|i| teams[i]).collect::<BTreeSet<_>>())
            .filter(|set| {
                leaders.is_subset(set)
                    && set.iter().filter(|t| !leaders.contains(*t)).all(|w| {
                        teams
                            .iter()
                            .filter(|t| !set.contains(*t))
                            .all(|o| wins[*w] > wins[*o])
                    })
            })
            .collect();
        assert_eq!(valid.len(), 1, "rule should determine a unique set");
        all.extend(valid[0].iter().map(|t| (*t).clone()));
    }
    all
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qualifiers_match_enumeration(order in Just((60u32..90).collect::<Vec<_>>()).prop_shuffle(), seed in any::<u64>()) {
        let league = LeagueStructure::mlb();
        let wins: BTreeMap<TeamId, u32> = league.teams().into_iter().zip(order).collect();
        let got = playoff_qualifiers(&wins, &league, &PlayoffFormat::default(), &mut rng_from_seed(seed)).unwrap();
        prop_assert_eq!(got, brute_force_qualifiers(&wins, &league, 3));
    }

    #[test]
    fn bracket_is_always_full(wins in prop::collection::vec(60u32..100, 30), seed in any::<u64>()) {
        let league = LeagueStructure::mlb();
        let wins: BTreeMap<TeamId, u32> = league.teams().into_iter().zip(wins).collect();
        let got = playoff_qualifiers(&wins, &league, &PlayoffFormat::default(), &mut rng_from_seed(seed)).unwrap();
        for l in &league.leagues {
            prop_assert_eq!(l.teams().filter(|t| got.contains(*t)).count(), 6);
            let top = l.teams().max_by_key(|t| wins[*t]).unwrap();
            prop_assert!(got.contains(top));
        }
    }
}
