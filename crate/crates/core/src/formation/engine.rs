use super::{merge_pass, split_pass, FormationTrace, GameContext, Partition, SplitMode};
use crate::error::{Error, Result};
use crate::oracle::bell_number;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FormationOptions {
    pub split: SplitMode,
}

/// Round cap for [`merge_split_until_stable`]: `10 N Bell(min(N, 12))`.
fn round_guard(n: usize) -> u64 {
    let bell = bell_number(n.min(12)).min(u64::MAX as u128) as u64;
    10u64.saturating_mul(n as u64).saturating_mul(bell).max(10)
}

/// Alternates merge and split passes from `partition` until a full round
/// changes nothing.
///
/// Every accepted operation leaves no SU worse off and makes one strictly
/// better, so the utility profile only climbs and the loop ends. Tripping the
/// round guard means the preference order is broken and is reported as an
/// internal error.
pub fn merge_split_until_stable(
    partition: Partition,
    ctx: &GameContext,
    options: FormationOptions,
) -> Result<(Partition, FormationTrace)> {
    let guard = round_guard(ctx.n());
    let mut trace = FormationTrace::default();
    let mut current = partition;
    loop {
        if trace.iterations as u64 >= guard {
            return Err(Error::Internal(format!(
                "merge-and-split did not settle within {guard} rounds"
            )));
        }
        trace.iterations += 1;
        let (merged, merges) = merge_pass(current, ctx);
        let (split, splits) = split_pass(merged, ctx, options.split)?;
        current = split;
        let quiet = merges.is_empty() && splits.is_empty();
        trace.events.extend(merges);
        trace.events.extend(splits);
        if quiet {
            break;
        }
    }
    trace.terminated = true;
    Ok((current, trace))
}
