use super::{Coalition, FormationEvent, GameContext, MemberSet, Partition};
use crate::error::{Error, Result};
use crate::game::pareto_improves;
use crate::oracle::RgsPartitions;

/// Which splits of a coalition are searched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitMode {
    /// Two-block splits only, repeated to a fixpoint.
    #[default]
    TwoBlock,
    /// Every set partition of the coalition (Bell-number many); for small coalitions.
    Full,
}

/// Largest coalition [`SplitMode::Full`] will enumerate.
pub const FULL_SPLIT_LIMIT: usize = 12;

fn split_preferred(whole: &Coalition, parts: &[Coalition]) -> bool {
    pareto_improves(parts.iter().map(|p| (p.utility(), whole.utility())))
}

/// First Pareto-preferred two-block split, in increasing order of the mask
/// of the block that excludes the lowest member.
fn two_block_split(c: &Coalition, ctx: &GameContext) -> Option<Vec<Coalition>> {
    let ids = c.members.to_vec();
    let rest = &ids[1..];
    for mask in 1u64..(1u64 << rest.len()) {
        let moved: MemberSet = rest
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask & (1 << bit) != 0)
            .map(|(_, &id)| id)
            .collect();
        let parts = [ctx.evaluate(c.members.difference(moved)), ctx.evaluate(moved)];
        if split_preferred(c, &parts) {
            return Some(parts.to_vec());
        }
    }
    None
}

/// First Pareto-preferred split into any number of blocks, in restricted
/// growth string order.
fn full_split(c: &Coalition, ctx: &GameContext) -> Result<Option<Vec<Coalition>>> {
    let ids = c.members.to_vec();
    if ids.len() > FULL_SPLIT_LIMIT {
        return Err(Error::Capacity {
            what: "coalition size for full split search",
            requested: ids.len(),
            limit: FULL_SPLIT_LIMIT,
        });
    }
    let mut rgs = RgsPartitions::new(ids.len());
    while let Some(labels) = rgs.next_labels() {
        let blocks = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
        if blocks < 2 {
            continue;
        }
        let mut sets = vec![MemberSet::EMPTY; blocks];
        for (&label, &id) in labels.iter().zip(&ids) {
            sets[label as usize].insert(id);
        }
        let parts: Vec<Coalition> = sets.into_iter().map(|s| ctx.evaluate(s)).collect();
        if split_preferred(c, &parts) {
            return Ok(Some(parts));
        }
    }
    Ok(None)
}

/// One split pass: every coalition is examined; a Pareto-preferred split is
/// applied and its blocks are examined again, until no coalition can split.
pub fn split_pass(
    partition: Partition,
    ctx: &GameContext,
    mode: SplitMode,
) -> Result<(Partition, Vec<FormationEvent>)> {
    let mut work: Vec<Coalition> = partition.into_coalitions();
    work.reverse();
    let mut done = Vec::with_capacity(work.len());
    let mut events = Vec::new();
    while let Some(c) = work.pop() {
        if c.size() < 2 {
            done.push(c);
            continue;
        }
        let split = match mode {
            SplitMode::TwoBlock => two_block_split(&c, ctx),
            SplitMode::Full => full_split(&c, ctx)?,
        };
        match split {
            Some(parts) => {
                events.push(FormationEvent::Split {
                    source: c.members,
                    parts: parts.iter().map(|p| p.members).collect(),
                });
                work.extend(parts.into_iter().rev());
            }
            None => done.push(c),
        }
    }
    Ok((Partition::from_coalitions(done), events))
}

#[cfg(test)]
mod tests {
    use super::super::test_support::*;
    use super::*;
    use crate::game::ExtReal;

    #[test]
    fn singletons_are_unchanged() {
        let c = ctx(&[(1000.0, 0.0), (1010.0, 0.0)], 0.01);
        for mode in [SplitMode::TwoBlock, SplitMode::Full] {
            let (p, ev) = split_pass(Partition::singletons(&c), &c, mode).unwrap();
            assert!(ev.is_empty());
            assert_eq!(p.len(), 2);
        }
    }

    #[test]
    fn infeasible_coalition_splits() {
        let c = ctx(&[(1000.0, 0.0), (1000.0, 10.0), (1000.0, 20.0)], 0.04);
        let grand = Partition::grand(&c);
        assert_eq!(grand.coalitions()[0].utility(), ExtReal::NegInf);
        for mode in [SplitMode::TwoBlock, SplitMode::Full] {
            let (p, ev) = split_pass(grand.clone(), &c, mode).unwrap();
            assert!(!ev.is_empty());
            assert!(p.coalitions().iter().all(|k| k.utility().is_finite()));
            p.validate(3).unwrap();
        }
    }

    #[test]
    fn two_block_order_moves_highest_masks_last() {
        // Four co-located SUs at pf = 0.03: the grand coalition is infeasible
        // (1 - 0.97^4 > 0.1) while triples are not, so the very first
        // candidate, peeling off member 2, is already preferred.
        let c = ctx(&[(1000.0, 0.0); 4], 0.03);
        let (p, ev) = split_pass(Partition::grand(&c), &c, SplitMode::TwoBlock).unwrap();
        assert_eq!(
            ev[0],
            FormationEvent::Split {
                source: set(&[1, 2, 3, 4]),
                parts: vec![set(&[1, 3, 4]), set(&[2])],
            }
        );
        assert_eq!(p.sets(), vec![set(&[1, 3, 4]), set(&[2])]);
    }
}
