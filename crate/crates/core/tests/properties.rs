//! Property and oracle tests across modules.

use std::collections::BTreeMap;

use coalsense::formation::{
    merge_split_until_stable, FormationEvent, FormationOptions, FormationTrace, GameContext, MemberSet, Partition,
};
use coalsense::game::{coalition_value, max_coalition_size, pareto_preferred, ExtReal, GameParams};
use coalsense::network::{Network, NodeId, Position, RadioParams};
use coalsense::oracle::optimal_partition;
use coalsense::scenario::monte_carlo_validate;
use coalsense::sensing::{
    avg_snr, coalition_false_alarm_probability, coalition_missing_probability, detection_probability,
    false_alarm_probability, lambda_for_target_pf, missing_probability, reporting_error_probability,
};
use proptest::prelude::*;

fn context(points: &[(f64, f64)], pf: f64) -> GameContext {
    let params = RadioParams::with_lambda(lambda_for_target_pf(pf, 5).unwrap());
    let sus = points.iter().map(|&(x, y)| Position::new(x, y)).collect();
    let net = Network::new(Position::new(1500.0, 1500.0), sus, params).unwrap();
    GameContext::new(net, GameParams::default()).unwrap()
}

fn points(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((0.0..3000.0f64, 0.0..3000.0f64), n)
}

fn pf_choice() -> impl Strategy<Value = f64> {
    prop::sample::select(vec![0.005, 0.01, 0.02, 0.03, 0.05, 0.08])
}

#[test]
fn detection_matches_high_precision_reference() {
    let mut reader = csv::Reader::from_path(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/detection_golden.csv")).unwrap();
    let mut rows = 0;
    for record in reader.records() {
        let r = record.unwrap();
        let f = |i: usize| r[i].parse::<f64>().unwrap();
        let (snr, lambda, m, pd, pf) = (f(0), f(1), r[2].parse::<u32>().unwrap(), f(3), f(4));
        let got_pd = detection_probability(snr, lambda, m).unwrap();
        let got_pf = false_alarm_probability(lambda, m);
        let tol = |x: f64| 1e-13 + 1e-11 * x.abs();
        assert!((got_pd - pd).abs() <= tol(pd), "P_d({snr}, {lambda}, {m}) = {got_pd}, want {pd}");
        assert!((got_pf - pf).abs() <= tol(pf), "P_f({lambda}, {m}) = {got_pf}, want {pf}");
        rows += 1;
    }
    assert_eq!(rows, 144);
}

#[test]
fn size_bound_matches_barrier() {
    let alpha = 0.1;
    for pf in [0.005, 0.01, 0.05] {
        let bound = max_coalition_size(alpha, pf).unwrap();
        for size in 1..=bound + 3 {
            let qf = coalition_false_alarm_probability(pf, &vec![0.0; size]).unwrap();
            let value = coalition_value(0.0, qf, alpha).value;
            assert_eq!(value == ExtReal::NegInf, size > bound, "pf {pf}, size {size}, bound {bound}");
        }
    }
}

/// Smallest weighted-average missing probability over partitions whose
/// blocks all satisfy `Q_f <= alpha`, built block by block: the lowest
/// remaining SU joins every subset of the others in turn.
fn brute_force_optimum(ctx: &GameContext) -> f64 {
    fn go(ctx: &GameContext, rest: MemberSet, acc: f64, best: &mut f64) {
        let Some(first) = rest.min_id() else {
            *best = best.min(acc);
            return;
        };
        let others: Vec<NodeId> = rest.iter().filter(|&i| i != first).collect();
        for mask in 0u32..(1 << others.len()) {
            let mut block = MemberSet::singleton(first);
            for (k, &id) in others.iter().enumerate() {
                if mask >> k & 1 == 1 {
                    block.insert(id);
                }
            }
            let c = ctx.evaluate(block);
            if c.qf() <= ctx.alpha() {
                go(ctx, rest.difference(block), acc + block.len() as f64 * c.qm(), best);
            }
        }
    }
    let mut best = f64::INFINITY;
    go(ctx, MemberSet::full(ctx.n()), 0.0, &mut best);
    best / ctx.n() as f64
}

/// SU utilities before and after each event, for the SUs the event touches.
fn event_utilities(ctx: &GameContext, event: &FormationEvent) -> (BTreeMap<NodeId, ExtReal>, BTreeMap<NodeId, ExtReal>) {
    let side = |sets: Vec<MemberSet>| {
        sets.into_iter()
            .flat_map(|s| {
                let u = ctx.evaluate(s).utility();
                s.iter().map(move |id| (id, u))
            })
            .collect()
    };
    (side(event.before()), side(event.after()))
}

/// Distance at which the increasing map `f` reaches `target`.
fn invert_distance(target: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (mut lo, mut hi) = (1.0, 1.0e5);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn two_member_example_reproduced_by_simulation() {
    let pf = 0.01;
    let mut params = RadioParams::with_lambda(lambda_for_target_pf(pf, 5).unwrap());
    let miss_at = |d: f64| missing_probability(avg_snr(params.pu_power, d, &params).unwrap(), params.lambda, params.m).unwrap();
    let d1 = invert_distance(0.1, miss_at);
    let d2 = invert_distance(0.2, miss_at);
    // Both SUs on one ray from the PU; the report power puts P_e = 0.01 on their link.
    let mut unit = params;
    unit.su_report_power = 1.0;
    let unit_link = invert_distance(0.01, |d| reporting_error_probability(avg_snr(1.0, d, &unit).unwrap()));
    params.su_report_power = ((d2 - d1) / unit_link).powf(params.mu);
    let sus = vec![Position::new(1500.0 + d1, 1500.0), Position::new(1500.0 + d2, 1500.0)];
    let net = Network::new(Position::new(1500.0, 1500.0), sus, params).unwrap();
    let ctx = GameContext::new(net, GameParams::default()).unwrap();
    let pair = ctx.evaluate(MemberSet::full(2));
    assert_eq!(pair.head, 1);
    assert!((ctx.pe(2, 1) - 0.01).abs() < 1e-9, "{}", ctx.pe(2, 1));
    assert!((pair.qm() - 0.0206).abs() < 1e-9, "{}", pair.qm());
    assert!((pair.qf() - 0.029602).abs() < 1e-9, "{}", pair.qf());

    let trials = 1_000_000;
    let est = monte_carlo_validate(&pair, &ctx, trials, 11);
    let se = |p: f64| (p * (1.0 - p) / trials as f64).sqrt();
    assert!((est.qm - pair.qm()).abs() < 4.0 * se(pair.qm()), "{} vs {}", est.qm, pair.qm());
    assert!((est.qf - pair.qf()).abs() < 4.0 * se(pair.qf()), "{} vs {}", est.qf, pair.qf());
}

#[test]
fn merge_split_terminates_on_random_networks() {
    let mut runner = proptest::test_runner::TestRunner::new(ProptestConfig {
        cases: 1000,
        ..ProptestConfig::default()
    });
    runner
        .run(&(points(2..=30), pf_choice()), |(pts, pf)| {
            let ctx = context(&pts, pf);
            let (p, trace) = merge_split_until_stable(Partition::singletons(&ctx), &ctx, FormationOptions::default())
                .map_err(|e| TestCaseError::fail(e.to_string()))?;
            prop_assert!(trace.terminated);
            prop_assert!(p.validate(ctx.n()).is_ok());
            Ok(())
        })
        .unwrap();
}

proptest! {
    #[test]
    fn probabilities_stay_in_unit_interval(lambda in 0.0..100.0f64, log_snr in -6.0..6.0f64, m in 2u32..=10) {
        let snr = 10f64.powf(log_snr);
        let pd = detection_probability(snr, lambda, m).unwrap();
        let pf = false_alarm_probability(lambda, m);
        let pe = reporting_error_probability(snr);
        prop_assert!((0.0..=1.0).contains(&pd));
        prop_assert!((0.0..=1.0).contains(&pf));
        prop_assert!((0.0..=1.0).contains(&pe));
        prop_assert!(pd + 1e-12 >= pf);
    }

    #[test]
    fn pareto_order_is_irreflexive_and_asymmetric(
        a in prop::collection::vec(prop::sample::select(vec![-1.0, 0.5, 0.9, 0.99, 1.0, f64::NEG_INFINITY]), 1..6),
        b in prop::collection::vec(prop::sample::select(vec![-1.0, 0.5, 0.9, 0.99, 1.0, f64::NEG_INFINITY]), 1..6),
    ) {
        let n = a.len().min(b.len());
        let map = |v: &[f64]| -> BTreeMap<NodeId, ExtReal> {
            v[..n].iter().enumerate().map(|(i, &u)| (i + 1, ExtReal::from_f64(u))).collect()
        };
        let (ma, mb) = (map(&a), map(&b));
        prop_assert!(!pareto_preferred(&ma, &ma).unwrap());
        prop_assert!(!(pareto_preferred(&ma, &mb).unwrap() && pareto_preferred(&mb, &ma).unwrap()));
    }

    #[test]
    fn adding_members_never_hurts_detection_or_false_alarm(
        terms in prop::collection::vec((0.0..1.0f64, 0.0..0.5f64), 1..8),
        extra in (0.0..1.0f64, 0.0..0.5f64),
        pf in 0.0..0.2f64,
    ) {
        let (pm, pe): (Vec<f64>, Vec<f64>) = terms.iter().copied().unzip();
        let mut pm2 = pm.clone();
        let mut pe2 = pe.clone();
        pm2.push(extra.0);
        pe2.push(extra.1);
        let qm = coalition_missing_probability(&pm, &pe).unwrap();
        let qm2 = coalition_missing_probability(&pm2, &pe2).unwrap();
        let qf = coalition_false_alarm_probability(pf, &pe).unwrap();
        let qf2 = coalition_false_alarm_probability(pf, &pe2).unwrap();
        prop_assert!(qm2 <= qm + 1e-15);
        prop_assert!(qf2 + 1e-15 >= qf);
    }

    #[test]
    fn oracle_matches_independent_enumerator(pts in points(1..=6), pf in pf_choice()) {
        let ctx = context(&pts, pf);
        let sol = optimal_partition(&ctx, 12).unwrap();
        let brute = brute_force_optimum(&ctx);
        prop_assert!((sol.avg_missing - brute).abs() <= 1e-15, "{} vs {}", sol.avg_missing, brute);
        prop_assert!(sol.partition.coalitions().iter().all(|c| c.qf() <= ctx.alpha()));
    }

    #[test]
    fn every_event_is_a_pareto_improvement(pts in points(2..=14), pf in pf_choice()) {
        let ctx = context(&pts, pf);
        let initial = Partition::singletons(&ctx);
        let (_, trace) = merge_split_until_stable(initial.clone(), &ctx, FormationOptions::default()).unwrap();
        let mut sets = initial.sets();
        for event in &trace.events {
            let (before, after) = event_utilities(&ctx, event);
            prop_assert_eq!(before.keys().collect::<Vec<_>>(), after.keys().collect::<Vec<_>>());
            prop_assert!(before.iter().all(|(id, u)| after[id] >= *u), "{}", event);
            prop_assert!(before.iter().any(|(id, u)| after[id] > *u), "{}", event);
            sets = FormationTrace::replay(&sets, std::slice::from_ref(event)).unwrap();
            let bound = max_coalition_size(ctx.alpha(), ctx.pf()).unwrap();
            prop_assert!(sets.iter().all(|s| s.len() <= bound));
        }
    }

    #[test]
    fn weighted_average_matches_per_su_average(pts in points(1..=20), pf in pf_choice()) {
        let ctx = context(&pts, pf);
        let (p, _) = merge_split_until_stable(Partition::singletons(&ctx), &ctx, FormationOptions::default()).unwrap();
        let per_su = ctx
            .network()
            .ids()
            .map(|id| p.coalition_of(id).unwrap().qm())
            .sum::<f64>()
            / ctx.n() as f64;
        prop_assert!((per_su - p.avg_missing()).abs() <= 1e-15, "{} vs {}", per_su, p.avg_missing());
        for c in p.coalitions() {
            prop_assert!(c.qf() < ctx.alpha());
            let u = c.utility();
            prop_assert!(c.members.iter().all(|id| p.utilities()[&id] == u));
        }
    }
}
