//! Stability checks for a partition.
//!
//! `D_hp` stability: no pair of coalitions wants to merge and no coalition
//! wants to split in two. `D_c` stability is the stronger notion that no group
//! of SUs wants to deviate to any collection at all; it is characterised by
//! two enumerable conditions, checked here by brute force for small networks.

use super::merge::merge_preferred;
use super::{Coalition, GameContext, MemberSet, Partition};
use crate::error::{Error, Result};
use crate::game::pareto_improves;
use crate::oracle::RgsPartitions;

/// Largest network [`check_dc_conditions`] accepts.
pub const DC_LIMIT: usize = 12;

/// True iff no pairwise merge and no two-block split is Pareto-preferred.
pub fn is_dhp_stable(partition: &Partition, ctx: &GameContext) -> bool {
    let cs = partition.coalitions();
    for (i, a) in cs.iter().enumerate() {
        for b in &cs[i + 1..] {
            if merge_preferred(&ctx.evaluate(a.members.union(b.members)), a, b) {
                return false;
            }
        }
    }
    cs.iter().all(|c| !has_two_block_split(c, ctx))
}

fn has_two_block_split(c: &Coalition, ctx: &GameContext) -> bool {
    let Some(low) = c.members.min_id() else {
        return false;
    };
    let rest = c.members.difference(MemberSet::singleton(low));
    submasks(rest).any(|moved| {
        let kept = c.members.difference(moved);
        pareto_improves([
            (ctx.evaluate(kept).utility(), c.utility()),
            (ctx.evaluate(moved).utility(), c.utility()),
        ])
    })
}

/// Non-empty submasks of `set`, in decreasing bit order.
fn submasks(set: MemberSet) -> impl Iterator<Item = MemberSet> {
    let full = set.bits();
    let mut next = full;
    std::iter::from_fn(move || {
        if next == 0 {
            return None;
        }
        let out = next;
        next = (next - 1) & full;
        Some(MemberSet::from_bits(out))
    })
}

/// Counterexample to `D_c` stability.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DcWitness {
    /// Disjoint `s1`, `s2` inside `coalition` whose union is not preferred to the pair.
    UnpreferredUnion {
        coalition: MemberSet,
        s1: MemberSet,
        s2: MemberSet,
    },
    /// A group straddling several coalitions that does not prefer its projection.
    IncompatibleGroup { group: MemberSet, projection: Vec<MemberSet> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DcReport {
    pub stable: bool,
    pub witness: Option<DcWitness>,
}

fn value_of(table: &[Option<Coalition>], set: MemberSet) -> crate::game::ExtReal {
    table[set.bits() as usize]
        .as_ref()
        .expect("non-empty subset")
        .utility()
}

fn find_witness(sets: &[MemberSet], table: &[Option<Coalition>], n: usize) -> Option<DcWitness> {
    // Every pair of disjoint sub-coalitions of a T_i must prefer their union.
    for &t in sets {
        for union in submasks(t).filter(|u| u.len() >= 2) {
            let low = MemberSet::singleton(union.min_id().unwrap());
            for s2 in submasks(union.difference(low)) {
                let s1 = union.difference(s2);
                let whole = value_of(table, union);
                if !pareto_improves([(whole, value_of(table, s1)), (whole, value_of(table, s2))]) {
                    return Some(DcWitness::UnpreferredUnion { coalition: t, s1, s2 });
                }
            }
        }
    }
    // Every T-incompatible group must prefer its projection onto T.
    for bits in 1u64..(1u64 << n) {
        let group = MemberSet::from_bits(bits);
        if sets.iter().any(|t| group.is_subset(*t)) {
            continue;
        }
        let projection: Vec<MemberSet> = sets
            .iter()
            .map(|t| t.intersection(group))
            .filter(|p| !p.is_empty())
            .collect();
        let whole = value_of(table, group);
        if !pareto_improves(projection.iter().map(|p| (value_of(table, *p), whole))) {
            return Some(DcWitness::IncompatibleGroup { group, projection });
        }
    }
    None
}

fn dc_table(ctx: &GameContext) -> Result<Vec<Option<Coalition>>> {
    ctx.all_subsets(DC_LIMIT).map_err(|_| Error::Capacity {
        what: "number of SUs for D_c check",
        requested: ctx.n(),
        limit: DC_LIMIT,
    })
}

/// Checks both `D_c` conditions for `partition` by enumeration.
pub fn check_dc_conditions(partition: &Partition, ctx: &GameContext) -> Result<DcReport> {
    let table = dc_table(ctx)?;
    let witness = find_witness(&partition.sets(), &table, ctx.n());
    Ok(DcReport {
        stable: witness.is_none(),
        witness,
    })
}

/// Searches every partition of the network for one meeting both `D_c`
/// conditions. Such a partition is unique when it exists.
pub fn find_dc_stable_partition(ctx: &GameContext) -> Result<Option<Partition>> {
    let table = dc_table(ctx)?;
    let n = ctx.n();
    let mut rgs = RgsPartitions::new(n);
    while let Some(labels) = rgs.next_labels() {
        let sets = crate::oracle::blocks_of(labels);
        if find_witness(&sets, &table, n).is_none() {
            return Ok(Some(Partition::from_sets(ctx, sets)?));
        }
    }
    Ok(None)
}
