use super::{Coalition, FormationEvent, GameContext, MemberSet, Partition};
use crate::game::pareto_improves;

/// Whether merging `a` and `b` into `merged` is Pareto-preferred by their members.
pub(crate) fn merge_preferred(merged: &Coalition, a: &Coalition, b: &Coalition) -> bool {
    pareto_improves([(merged.utility(), a.utility()), (merged.utility(), b.utility())])
}

/// One merge pass.
///
/// Coalitions act in descending order of value (ties: lowest member id).
/// The acting coalition scans the others by ascending centroid distance and
/// merges with the first one for which the union is Pareto-preferred; after a
/// merge the grown coalition keeps scanning. Once it finds no partner its
/// decision is final for this pass, and coalitions absorbed before their
/// turn do not act.
pub fn merge_pass(partition: Partition, ctx: &GameContext) -> (Partition, Vec<FormationEvent>) {
    let mut alive = partition.into_coalitions();
    let mut order: Vec<(MemberSet, crate::game::ExtReal)> =
        alive.iter().map(|c| (c.members, c.utility())).collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.min_id().cmp(&b.0.min_id())));

    let mut events = Vec::new();
    for (initial, _) in order {
        let Some(mut idx) = alive.iter().position(|c| c.members == initial) else {
            continue;
        };
        loop {
            let actor = alive[idx];
            let centre = ctx.centroid(actor.members);
            let mut candidates: Vec<(f64, usize, usize)> = alive
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != idx)
                .map(|(j, c)| {
                    let d = ctx.centroid(c.members).distance(&centre);
                    (d, c.members.min_id().unwrap_or(usize::MAX), j)
                })
                .collect();
            candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

            let found = candidates.into_iter().find_map(|(_, _, j)| {
                let partner = alive[j];
                let merged = ctx.evaluate(actor.members.union(partner.members));
                merge_preferred(&merged, &actor, &partner).then_some((j, merged))
            });
            let Some((j, merged)) = found else {
                break;
            };
            events.push(FormationEvent::Merge {
                parts: vec![actor.members, alive[j].members],
                result: merged.members,
            });
            alive[idx] = merged;
            alive.swap_remove(j);
            // swap_remove may have moved the actor into slot j
            if idx == alive.len() {
                idx = j;
            }
        }
    }
    (Partition::from_coalitions(alive), events)
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;

    #[test]
    fn single_coalition_is_unchanged() {
        let c = ctx(&[(1000.0, 0.0)], 0.01);
        let (p, ev) = merge_pass(Partition::singletons(&c), &c);
        assert!(ev.is_empty());
        assert_eq!(p.len(), 1);
    }

    #[test]
    fn infeasible_union_never_merges() {
        // pf = 0.06: any pair has Q_f >= 1 - 0.94^2 > 0.1.
        let c = ctx(&[(1400.0, 0.0), (-1400.0, 0.0)], 0.06);
        assert_eq!(c.evaluate(c.all()).utility(), crate::game::ExtReal::NegInf);
        let (p, ev) = merge_pass(Partition::singletons(&c), &c);
        assert!(ev.is_empty());
        assert_eq!(p.len(), 2);
    }

    #[test]
    fn adjacent_weak_detectors_merge() {
        let c = ctx(&[(1400.0, 0.0), (1420.0, 0.0)], 0.01);
        let a = c.evaluate(set(&[1]));
        let b = c.evaluate(set(&[2]));
        let m = c.evaluate(set(&[1, 2]));
        assert!(m.utility() > a.utility() && m.utility() > b.utility());
        let (p, ev) = merge_pass(Partition::singletons(&c), &c);
        assert_eq!(p.sets(), vec![set(&[1, 2])]);
        assert_eq!(ev.len(), 1);
    }

    #[test]
    fn grown_coalition_keeps_scanning() {
        let c = ctx(&[(1400.0, 0.0), (1420.0, 0.0), (1410.0, 20.0)], 0.01);
        let (p, ev) = merge_pass(Partition::singletons(&c), &c);
        assert_eq!(p.sets(), vec![set(&[1, 2, 3])]);
        assert_eq!(ev.len(), 2);
        p.validate(3).unwrap();
    }
}
