//! Exact centralized benchmark: minimise the average per-SU missing
//! probability over every partition of the network, subject to each
//! coalition's false alarm staying at or below `alpha`.
//!
//! Partitions are enumerated as restricted growth strings (RGS): label
//! `a[i]` is the block of element `i`, with `a[0] = 0` and
//! `a[i] <= 1 + max(a[..i])`. Blocks therefore appear in order of their
//! lowest element.

use crate::error::{Error, Result};
use crate::formation::{
    weighted_average, Formation, FormationStrategy, FormationTrace, GameContext, MemberSet, Partition,
};

/// Default enumeration guard; Bell(12) = 4,213,597 partitions.
pub const ENUMERATION_LIMIT: usize = 12;
/// Hard ceiling reachable with the extended-capacity flag.
pub const EXTENDED_LIMIT: usize = 14;

/// Bell number via the Bell triangle. Exact for `n <= 40`.
pub fn bell_number(n: usize) -> u128 {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = Vec::with_capacity(row.len() + 1);
        next.push(*row.last().unwrap());
        for &v in &row {
            let last = *next.last().unwrap();
            next.push(last + v);
        }
        row = next;
    }
    row[0]
}

/// Lexicographic RGS enumerator over `{0..n}`; borrow-based to avoid
/// allocating per partition.
#[derive(Debug, Clone)]
pub struct RgsPartitions {
    labels: Vec<u8>,
    prefix_max: Vec<u8>,
    started: bool,
    done: bool,
}

impl RgsPartitions {
    pub fn new(n: usize) -> Self {
        assert!(n <= 64);
        RgsPartitions {
            labels: vec![0; n],
            prefix_max: vec![0; n],
            started: false,
            done: n == 0,
        }
    }

    pub fn next_labels(&mut self) -> Option<&[u8]> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(&self.labels);
        }
        let n = self.labels.len();
        let mut i = n;
        while i > 1 {
            i -= 1;
            if self.labels[i] <= self.prefix_max[i - 1] {
                self.labels[i] += 1;
                self.prefix_max[i] = self.prefix_max[i - 1].max(self.labels[i]);
                for j in i + 1..n {
                    self.labels[j] = 0;
                    self.prefix_max[j] = self.prefix_max[i];
                }
                return Some(&self.labels);
            }
        }
        self.done = true;
        None
    }
}

/// Member sets of the blocks of an RGS over SU ids `1..=labels.len()`.
pub fn blocks_of(labels: &[u8]) -> Vec<MemberSet> {
    let blocks = labels.iter().copied().max().map_or(0, |m| m as usize + 1);
    let mut sets = vec![MemberSet::EMPTY; blocks];
    for (i, &l) in labels.iter().enumerate() {
        sets[l as usize].insert(i + 1);
    }
    sets
}

fn check_capacity(n: usize, extended: bool) -> Result<()> {
    let limit = if extended { EXTENDED_LIMIT } else { ENUMERATION_LIMIT };
    if n == 0 || n > limit {
        return Err(Error::Capacity {
            what: "number of SUs for partition enumeration",
            requested: n,
            limit,
        });
    }
    if n > ENUMERATION_LIMIT {
        log::warn!("enumerating Bell({n}) = {} partitions", bell_number(n));
    }
    Ok(())
}

/// Every set partition of `{1..n}` exactly once, in lexicographic RGS order.
/// `extended` raises the size guard from 12 to 14.
pub fn enumerate_partitions(n: usize, extended: bool) -> Result<impl Iterator<Item = Vec<MemberSet>>> {
    check_capacity(n, extended)?;
    let mut rgs = RgsPartitions::new(n);
    Ok(std::iter::from_fn(move || rgs.next_labels().map(blocks_of)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralizedSolution {
    pub partition: Partition,
    pub avg_missing: f64,
    pub feasible: bool,
}

/// Solves the centralized problem exactly. `cap` is the largest network
/// accepted (at most [`EXTENDED_LIMIT`]).
///
/// Ties on the objective go to fewer coalitions, then to the earlier RGS.
/// With no feasible partition the all-singletons partition is returned with
/// `feasible = false`.
pub fn optimal_partition(ctx: &GameContext, cap: usize) -> Result<CentralizedSolution> {
    let n = ctx.n();
    if n > cap.min(EXTENDED_LIMIT) {
        return Err(Error::Capacity {
            what: "number of SUs for the centralized oracle",
            requested: n,
            limit: cap.min(EXTENDED_LIMIT),
        });
    }
    check_capacity(n, true)?;
    let table = ctx.all_subsets(EXTENDED_LIMIT)?;
    let alpha = ctx.alpha();
    let feasible_block: Vec<bool> = table
        .iter()
        .map(|c| c.as_ref().is_some_and(|c| c.qf() <= alpha))
        .collect();

    let mut best: Option<(f64, usize, Vec<u8>)> = None;
    let mut masks = [0u64; EXTENDED_LIMIT];
    let mut rgs = RgsPartitions::new(n);
    while let Some(labels) = rgs.next_labels() {
        let blocks = *labels.iter().max().unwrap() as usize + 1;
        masks[..blocks].fill(0);
        for (i, &l) in labels.iter().enumerate() {
            masks[l as usize] |= 1 << i;
        }
        let masks = &masks[..blocks];
        if !masks.iter().all(|&m| feasible_block[m as usize]) {
            continue;
        }
        let objective = weighted_average(masks.iter().map(|&m| {
            let c = table[m as usize].as_ref().unwrap();
            (c.size(), c.qm())
        }));
        let better = match &best {
            None => true,
            Some((obj, nb, _)) => objective < *obj || (objective == *obj && blocks < *nb),
        };
        if better {
            best = Some((objective, blocks, labels.to_vec()));
        }
    }

    match best {
        Some((avg_missing, _, labels)) => Ok(CentralizedSolution {
            partition: Partition::from_sets(ctx, blocks_of(&labels))?,
            avg_missing,
            feasible: true,
        }),
        None => {
            let partition = Partition::singletons(ctx);
            Ok(CentralizedSolution {
                avg_missing: partition.avg_missing(),
                partition,
                feasible: false,
            })
        }
    }
}

/// The centralized optimum exposed as a formation strategy; the initial
/// partition is ignored.
#[derive(Debug, Clone, Copy)]
pub struct CentralizedStrategy {
    pub cap: usize,
}

impl Default for CentralizedStrategy {
    fn default() -> Self {
        CentralizedStrategy { cap: ENUMERATION_LIMIT }
    }
}

impl FormationStrategy for CentralizedStrategy {
    fn name(&self) -> &'static str {
        "centralized"
    }

    fn description(&self) -> &'static str {
        "exact minimum of the average missing probability over all partitions"
    }

    fn form(&self, ctx: &GameContext, _initial: Partition) -> Result<Formation> {
        let solution = optimal_partition(ctx, self.cap)?;
        Ok(Formation {
            partition: solution.partition,
            trace: FormationTrace {
                terminated: true,
                ..Default::default()
            },
        })
    }
}
