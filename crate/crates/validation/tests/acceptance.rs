//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sleeping_bandits::environment::RoundSchedule;
use sleeping_bandits::instances::{
    gen_hard_41, gen_hard_42, gen_static, Hard41Variant, Hard42Variant, HardInstanceParams41, HardInstanceParams42,
    StaticParams,
};
use sleeping_bandits::matching::{
    arm_proposing_gs, enumerate_stable_matchings, find_blocking_pairs, player_proposing_gs,
};
use sleeping_bandits::policies::{separation_check, RoundMode};
use sleeping_bandits::regret::{kl_bernoulli, kl_upper_bound, ucb_regret_bound, BaselineTable};
use sleeping_bandits::rng::derive_seed;
use sleeping_bandits::simulation::{run_trial, run_trial_with, TrialConfig};
use sleeping_bandits::{
    Algorithm, ArmId, EnvironmentSpec64, MatchInstance, Matching, PlayerId, PolicyState64, RegretLedger64,
};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn random_instance(rng: &mut ChaCha8Rng, max_players: usize, max_arms: usize, max_cap: u32) -> MatchInstance {
    let n = rng.gen_range(1..=max_players);
    let k = rng.gen_range(1..=max_arms);
    let players: Vec<PlayerId> = (0..n).map(PlayerId).collect();
    let arms: Vec<ArmId> = (0..k).map(ArmId).collect();
    let player_prefs = (0..n)
        .map(|_| {
            let mut r = arms.clone();
            r.shuffle(rng);
            r
        })
        .collect();
    let arm_prefs = (0..k)
        .map(|_| {
            let mut r = players.clone();
            r.shuffle(rng);
            r
        })
        .collect();
    let caps = (0..k).map(|_| rng.gen_range(1..=max_cap)).collect();
    MatchInstance::new(players, arms, player_prefs, arm_prefs, caps).unwrap()
}

fn c1_gs_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut bad = 0;
    let mut multi = 0;
    for _ in 0..1000 {
        let inst = random_instance(&mut rng, 4, 4, 2);
        let all = enumerate_stable_matchings(&inst).unwrap();
        let best = player_proposing_gs(&inst);
        let worst = arm_proposing_gs(&inst);
        multi += usize::from(all.len() > 1);
        let ok = all.contains(&best)
            && all.contains(&worst)
            && all
                .iter()
                .all(|m| best.weakly_dominates(m, &inst) && m.weakly_dominates(&worst, &inst));
        bad += usize::from(!ok);
    }
    outcome(
        bad == 0,
        format!("1000 instances ({multi} with several stable matchings), {bad} mismatches"),
    )
}

fn c2_stability() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut bad = 0;
    for _ in 0..10_000 {
        let inst = random_instance(&mut rng, 6, 5, 2);
        for m in [player_proposing_gs(&inst), arm_proposing_gs(&inst)] {
            bad += usize::from(!find_blocking_pairs(&inst, &m).unwrap().is_empty());
        }
    }
    outcome(bad == 0, format!("10000 instances, {bad} outputs with blocking pairs"))
}

/// The static market used by several criteria: N = 3, K = 5, reward grid
/// {0.1, 0.3, ..., 0.9} permuted per player, everyone present.
fn static_market(horizon: usize) -> EnvironmentSpec64 {
    let p = StaticParams {
        num_players: 3,
        num_arms: 5,
        horizon,
        ..Default::default()
    };
    gen_static(&p, &mut ChaCha8Rng::seed_from_u64(2024)).unwrap()
}

fn trials(
    spec: &EnvironmentSpec64,
    table: &BaselineTable,
    config: TrialConfig,
    n: usize,
    seed: u64,
) -> Vec<RegretLedger64> {
    (0..n)
        .into_par_iter()
        .map(|k| run_trial(spec, table, config, derive_seed(seed, k as u64)).unwrap().ledger)
        .collect()
}

/// Mean over trials and players of cumulative pessimal regret after `r`
/// local rounds (every player attends every round here).
fn mean_pessimal_at(ledgers: &[RegretLedger64], r: usize) -> f64 {
    let mut total = 0.0;
    let mut count = 0.0;
    for l in ledgers {
        for p in 0..l.num_players() {
            total += l.pessimal(PlayerId(p))[r - 1];
            count += 1.0;
        }
    }
    total / count
}

fn c3_ucb_sublinear() -> Outcome {
    let horizon = 50_000;
    let spec = static_market(horizon);
    let table = BaselineTable::new(&spec);
    let gap = spec.min_gap();
    let ledgers = trials(&spec, &table, TrialConfig::new(Algorithm::AcUcb), 20, 3);
    let mut envelope_ok = true;
    let mut worst = String::new();
    for p in 0..3 {
        let player = PlayerId(p);
        let mean = ledgers.iter().map(|l| l.pessimal(player)[horizon - 1]).sum::<f64>() / 20.0;
        let bound = ucb_regret_bound(ledgers[0].delta_max(player), 3, 5, horizon as u64, gap);
        envelope_ok &= mean < bound;
        worst += &format!(" p{p}: {mean:.1} < {bound:.0};");
    }
    let full = mean_pessimal_at(&ledgers, horizon);
    let half = mean_pessimal_at(&ledgers, horizon / 2);
    let ratio = (full - half) / half;
    outcome(
        envelope_ok && half > 0.0 && ratio <= 0.6,
        format!(
            "gap {gap:.2}; envelope{worst} growth (R(T)-R(T/2))/R(T/2) = ({full:.1}-{half:.1})/{half:.1} = {ratio:.3} <= 0.6"
        ),
    )
}

fn c4_etgs_convergence() -> Outcome {
    let horizon = 50_000;
    let spec = static_market(horizon);
    let table = BaselineTable::new(&spec);
    let tail_start = horizon - horizon / 10;
    let mut details = Vec::new();
    let mut pass = true;
    for alg in [Algorithm::AcEtgsRandom, Algorithm::AcEtgsWeighted] {
        // (optimal rounds, explore rounds, optimal exploit rounds, exploit rounds)
        let tallies: Vec<[usize; 4]> = (0..20u64)
            .into_par_iter()
            .map(|k| {
                let mut c = [0usize; 4];
                run_trial_with(&spec, &table, TrialConfig::new(alg), derive_seed(4, k), |r| {
                    if r.round > tail_start {
                        let optimal = r.decision.matching == r.baselines.optimal;
                        let explore = r.decision.mode == RoundMode::Explore;
                        c[0] += usize::from(optimal);
                        c[1] += usize::from(explore);
                        c[2] += usize::from(optimal && !explore);
                        c[3] += usize::from(!explore);
                    }
                })
                .unwrap();
                c
            })
            .collect();
        let tail = (horizon - tail_start) as f64;
        let mean = tallies.iter().map(|c| c[0] as f64 / tail).sum::<f64>() / tallies.len() as f64;
        let sum = |i: usize| tallies.iter().map(|c| c[i]).sum::<usize>();
        pass &= mean >= 0.99;
        details.push(format!(
            "{alg}: {:.2}% (tail explore rounds {:.2}%, exploit rounds optimal {}/{})",
            100.0 * mean,
            100.0 * sum(1) as f64 / (tail * tallies.len() as f64),
            sum(2),
            sum(3)
        ));
    }
    outcome(
        pass,
        format!("player-optimal in final 10% (>= 99%): {}", details.join(", ")),
    )
}

fn c5_failure_budget() -> Outcome {
    let p = StaticParams {
        num_players: 3,
        num_arms: 4,
        horizon: 2_000,
        ..Default::default()
    };
    let spec: EnvironmentSpec64 = gen_static(&p, &mut ChaCha8Rng::seed_from_u64(5)).unwrap();
    let table = BaselineTable::new(&spec);
    let config = TrialConfig {
        track_failures: true,
        ..TrialConfig::new(Algorithm::AcEtgsRandom)
    };
    let per_trial: Vec<f64> = (0..500u64)
        .into_par_iter()
        .map(|k| {
            let out = run_trial(&spec, &table, config, derive_seed(5, k)).unwrap();
            out.failure_rounds.iter().sum::<u64>() as f64 / 3.0
        })
        .collect();
    let n = per_trial.len() as f64;
    let mean = per_trial.iter().sum::<f64>() / n;
    let sd = (per_trial.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let se = sd / n.sqrt();
    let budget = 4.0 * 3.0 * 4.0;
    outcome(
        mean <= budget + 3.0 * se,
        format!("mean failure rounds per player {mean:.2} (sd {sd:.2}, se {se:.3}) <= 4NK + 3se = {:.2}", budget + 3.0 * se),
    )
}

/// Two arms with gap `delta` for one player, estimates placed so each true
/// mean sits exactly on the edge of its interval (`shift = ±radius`) or in
/// its centre (`exact`).
fn threshold_state(spec: &EnvironmentSpec64, count: u64, t: u64, exact: bool) -> PolicyState64 {
    let mut s = PolicyState64::new(1, 2);
    s.set_local_round(PlayerId(0), t);
    let r = ((t as f64).ln() / count as f64).sqrt();
    let (hi, lo) = (spec.mean(PlayerId(0), ArmId(0)), spec.mean(PlayerId(0), ArmId(1)));
    let (dh, dl) = if exact { (0.0, 0.0) } else { (-r, r) };
    s.set_statistics(PlayerId(0), ArmId(0), count, hi + dh);
    s.set_statistics(PlayerId(0), ArmId(1), count, lo + dl);
    s
}

fn c6_threshold() -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for delta in [0.1, 0.2, 0.3] {
        let spec = EnvironmentSpec64::new(
            1,
            2,
            vec![vec![0.5 + delta / 2.0, 0.5 - delta / 2.0]],
            vec![RoundSchedule::everyone(1, 2)],
        )
        .unwrap();
        let rv = spec.view(1).unwrap();
        for t in [100u64, 10_000, 1_000_000] {
            let threshold = 16.0 * (t as f64).ln() / (delta * delta);
            let above = threshold.floor() as u64 + 1;
            let below = threshold.ceil() as u64 - 1;
            let exact_above = separation_check(&threshold_state(&spec, above, t, true), &rv);
            let edge_above = separation_check(&threshold_state(&spec, above, t, false), &rv);
            let edge_below = separation_check(&threshold_state(&spec, below, t, false), &rv);
            let exact_below = separation_check(&threshold_state(&spec, below, t, true), &rv);
            pass &= exact_above && edge_above && !edge_below;
            lines.push(format!(
                "d={delta} T={t}: exact/edge above {exact_above}/{edge_above}, edge below {edge_below} (exact below {exact_below})"
            ));
        }
    }
    outcome(pass, lines.join("; "))
}

fn c7_kl() -> Outcome {
    let kl = kl_bernoulli(0.4, 0.6).unwrap();
    // independent evaluation: 0.4 ln(2/3) + 0.6 ln(3/2) = 0.2 ln 1.5
    let reference = 0.4 * (0.4f64 / 0.6).ln() + 0.6 * (0.6f64 / 0.4).ln();
    let point_ok = (kl - reference).abs() <= 1e-6 && (kl - 0.081093).abs() <= 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut violations = 0;
    let mut max_slack = f64::INFINITY;
    for _ in 0..10_000 {
        let delta = rng.gen_range(0.0..0.25);
        let eps = rng.gen_range(f64::MIN_POSITIVE..0.1);
        let kl = kl_bernoulli(0.5 - delta, 0.5 + eps).unwrap();
        let bound = kl_upper_bound(delta, eps);
        violations += usize::from(kl > bound);
        max_slack = max_slack.min(bound - kl);
    }
    outcome(
        point_ok && violations == 0,
        format!("kl(0.4, 0.6) = {kl:.6}; bound violations {violations}/10000 (min slack {max_slack:.2e})"),
    )
}

fn pairs(n: usize, p: &[(usize, usize)]) -> Matching {
    let players: Vec<PlayerId> = (0..n).map(PlayerId).collect();
    Matching::from_pairs(&players, p.iter().map(|&(i, j)| (PlayerId(i), ArmId(j))))
}

fn c8_hard_uniqueness() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();

    // fixed/variable construction, N = 3, K = 5; the 1-based alternative
    // (p1, a4) is (player 0, arm 3) here, and every other pair is checked too
    let mut variants = vec![Hard42Variant::Reference];
    for player in 0..2 {
        for arm in 2..5 {
            variants.push(Hard42Variant::Alternative { player, arm });
        }
    }
    for variant in variants {
        let p = HardInstanceParams42 {
            num_players: 3,
            num_arms: 5,
            horizon: 30,
            variant,
            ..Default::default()
        };
        let spec: EnvironmentSpec64 = gen_hard_42(&p).unwrap();
        for t in 1..=p.horizon {
            let var = p.variable_arm_at(t).0;
            let expected = match variant {
                Hard42Variant::Alternative { player, arm } if arm == var => {
                    let mut v = vec![(player, arm), (2, player)];
                    v.extend((0..2).filter(|&j| j != player).map(|j| (j, j)));
                    pairs(3, &v)
                }
                _ => pairs(3, &[(0, 0), (1, 1), (2, var)]),
            };
            let all = enumerate_stable_matchings(&spec.true_instance(t).unwrap()).unwrap();
            checked += 1;
            if all != vec![expected] {
                bad.push(format!("{variant:?} t={t}"));
            }
        }
    }

    // single-competitor construction
    let base = HardInstanceParams41 {
        horizon: 100,
        block_length: Some(10),
        ..Default::default()
    };
    let mut variants = vec![Hard41Variant::Reference];
    variants.extend((1..=base.blocks()).map(Hard41Variant::Alternative));
    for variant in variants {
        let p = HardInstanceParams41 { variant, ..base.clone() };
        let spec: EnvironmentSpec64 = gen_hard_41(&p).unwrap();
        for t in 1..=p.horizon {
            let competitor = (t - 1) / 10 + 1;
            let n = spec.num_players();
            let expected = if variant == Hard41Variant::Alternative(competitor) {
                let mut m = pairs(1, &[(0, 1)]);
                m.assign(PlayerId(competitor), ArmId(0).into());
                m
            } else {
                let mut m = pairs(1, &[(0, 0)]);
                m.assign(PlayerId(competitor), ArmId(1).into());
                m
            };
            let all = enumerate_stable_matchings(&spec.true_instance(t).unwrap()).unwrap();
            checked += 1;
            if all != vec![expected] || n != 11 {
                bad.push(format!("{variant:?} t={t}"));
            }
        }
    }
    outcome(
        bad.is_empty(),
        format!("{checked} rounds checked, {} mismatches {:?}", bad.len(), bad.iter().take(3).collect::<Vec<_>>()),
    )
}

/// Mean over trials of the target's per-window regret increments, for the
/// first and last five windows of `window` local rounds.
fn window_ratio(ledgers: &[RegretLedger64], player: PlayerId, window: usize) -> (f64, f64) {
    let mut first = 0.0;
    let mut last = 0.0;
    for l in ledgers {
        let s = l.pessimal(player);
        let at = |r: usize| if r == 0 { 0.0 } else { s[r - 1] };
        let len = s.len();
        first += at(5 * window) - at(0);
        last += at(len) - at(len - 5 * window);
    }
    let n = ledgers.len() as f64 * 5.0;
    (first / n, last / n)
}

fn c9_hard41_blocking() -> Outcome {
    let p = HardInstanceParams41 {
        horizon: 10_000,
        exponent: 0.5,
        delta: 0.2,
        ..Default::default()
    };
    let spec: EnvironmentSpec64 = gen_hard_41(&p).unwrap();
    let table = BaselineTable::new(&spec);
    let l = p.block_length();
    let ledgers = trials(&spec, &table, TrialConfig::new(Algorithm::AcUcb), 20, 9);
    let (first, last) = window_ratio(&ledgers, PlayerId(0), l);
    let ratio = last / first;

    let stat = static_market(p.horizon);
    let stat_table = BaselineTable::new(&stat);
    let stat_ledgers = trials(&stat, &stat_table, TrialConfig::new(Algorithm::AcUcb), 20, 9);
    let stat_ratios: Vec<f64> = (0..3)
        .map(|i| {
            let (f, s) = window_ratio(&stat_ledgers, PlayerId(i), l);
            s / f
        })
        .collect();
    let all_first = (0..3).map(|i| window_ratio(&stat_ledgers, PlayerId(i), l).0).sum::<f64>();
    let all_last = (0..3).map(|i| window_ratio(&stat_ledgers, PlayerId(i), l).1).sum::<f64>();
    let stat_ratio = all_last / all_first;
    outcome(
        ratio >= 0.25 && stat_ratio < 0.1,
        format!(
            "L = {l}; target per-block regret first 5 {first:.3}, last 5 {last:.3}, ratio {ratio:.3} >= 0.25; \
             static contrast ratio {stat_ratio:.4} < 0.1 (per player {stat_ratios:.4?})"
        ),
    )
}

fn c10_exploration_families(out_root: &Path) -> Outcome {
    let mut pass = true;
    let mut lines = Vec::new();
    for fig in ["fig1", "fig2", "fig3"] {
        let text = format!(
            r#"
            algorithms = ["ac-etgs-random", "ac-etgs-weighted"]
            instances = 5
            trials = 5
            seed = 10
            horizon = 20000
            raw_ledger = false
            [generator]
            name = "{fig}"
            num_players = 5
            num_arms = 10
            "#
        );
        let config = scb_harness::RunConfig::from_toml_str(&text, Path::new(".")).unwrap();
        let out = out_root.join(fig);
        let report = scb_harness::run(&config, &out, None).unwrap();
        let random = out.join("aggregate_ac-etgs-random.csv");
        let weighted = out.join("aggregate_ac-etgs-weighted.csv");
        let rows = |p: &Path| csv::Reader::from_path(p).map(|mut r| r.records().count()).unwrap_or(0);
        let paired = rows(&random) > 0 && rows(&random) == rows(&weighted);
        pass &= paired;
        let mut parts = vec![format!("{fig}: paired csv {paired}")];
        for series in &report.aggregates {
            let len = series.len();
            let full = series.mean_pessimal[len - 1];
            let half = series.mean_pessimal[len / 2 - 1];
            let ratio = (full - half) / half;
            pass &= half > 0.0 && ratio <= 0.6;
            parts.push(format!(
                "{} R(T)={full:.0} R(T/2)={half:.0} ratio {ratio:.3}",
                series.algorithm
            ));
        }
        let finals: Vec<f64> = report.aggregates.iter().map(|s| s.mean_pessimal[s.len() - 1]).collect();
        parts.push(format!("weighted/random final {:.3}", finals[1] / finals[0]));
        lines.push(parts.join(", "));
    }
    outcome(pass, format!("sublinear ratio <= 0.6 required; {}", lines.join(" | ")))
}

type Check = Box<dyn Fn() -> Outcome>;

fn main() {
    let out_dir = tempfile::tempdir().unwrap();
    let criteria: Vec<(&str, Check)> = vec![
        ("GS oracle equivalence", Box::new(c1_gs_oracle)),
        ("stability certification", Box::new(c2_stability)),
        ("AC-UCB pessimal sublinearity", Box::new(c3_ucb_sublinear)),
        ("AC-ETGS convergence", Box::new(c4_etgs_convergence)),
        ("failure-event budget", Box::new(c5_failure_budget)),
        ("threshold sufficiency", Box::new(c6_threshold)),
        ("KL utilities", Box::new(c7_kl)),
        ("hard-instance uniqueness", Box::new(c8_hard_uniqueness)),
        ("hard-41 blocking behaviour", Box::new(c9_hard41_blocking)),
        ("random vs weighted exploration, fig1-fig3 families", Box::new({
            let path = out_dir.path().to_path_buf();
            move || c10_exploration_families(&path)
        })),
    ];
    let mut failed = BTreeSet::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let started = Instant::now();
        let o = check();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "{tag} criterion {:>2} {name} [{:.1?}]: {}",
            i + 1,
            started.elapsed(),
            o.detail
        );
        if !o.pass {
            failed.insert(i + 1);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
