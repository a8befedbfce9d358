//! Formation strategies behind a common trait, registered by name so that
//! the simulator and the CLI can pick one at runtime.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{merge_split_until_stable, FormationOptions, FormationTrace, GameContext, Partition, SplitMode};
use crate::error::{Error, Result};
use crate::oracle::CentralizedStrategy;

/// Final partition of a formation run and how it was reached.
#[derive(Debug, Clone)]
pub struct Formation {
    pub partition: Partition,
    pub trace: FormationTrace,
}

pub trait FormationStrategy: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// Forms coalitions starting from `initial`.
    fn form(&self, ctx: &GameContext, initial: Partition) -> Result<Formation>;
}

/// Distributed merge-and-split with a configurable split search.
#[derive(Debug, Clone, Copy, Default)]
pub struct MergeSplit {
    pub split: SplitMode,
}

impl FormationStrategy for MergeSplit {
    fn name(&self) -> &'static str {
        match self.split {
            SplitMode::TwoBlock => "merge-split",
            SplitMode::Full => "merge-split-full",
        }
    }

    fn description(&self) -> &'static str {
        match self.split {
            SplitMode::TwoBlock => "distributed merge-and-split, two-block splits",
            SplitMode::Full => "distributed merge-and-split, splits into any number of blocks",
        }
    }

    fn form(&self, ctx: &GameContext, initial: Partition) -> Result<Formation> {
        let (partition, trace) = merge_split_until_stable(initial, ctx, FormationOptions { split: self.split })?;
        Ok(Formation { partition, trace })
    }
}

/// Every SU senses alone.
#[derive(Debug, Clone, Copy, Default)]
pub struct NonCooperative;

impl FormationStrategy for NonCooperative {
    fn name(&self) -> &'static str {
        "non-cooperative"
    }

    fn description(&self) -> &'static str {
        "no cooperation, every SU is its own coalition"
    }

    fn form(&self, ctx: &GameContext, _initial: Partition) -> Result<Formation> {
        Ok(Formation {
            partition: Partition::singletons(ctx),
            trace: FormationTrace {
                terminated: true,
                ..Default::default()
            },
        })
    }
}

#[derive(Clone, Default)]
pub struct StrategyRegistry {
    strategies: BTreeMap<&'static str, Arc<dyn FormationStrategy>>,
}

impl StrategyRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// `merge-split`, `merge-split-full`, `centralized` (capped at
    /// `centralized_cap` SUs) and `non-cooperative`.
    pub fn with_builtins(centralized_cap: usize) -> Self {
        let mut r = Self::new();
        r.register(Arc::new(MergeSplit { split: SplitMode::TwoBlock }));
        r.register(Arc::new(MergeSplit { split: SplitMode::Full }));
        r.register(Arc::new(CentralizedStrategy { cap: centralized_cap }));
        r.register(Arc::new(NonCooperative));
        r
    }

    /// Adds or replaces the strategy registered under its name.
    pub fn register(&mut self, strategy: Arc<dyn FormationStrategy>) {
        self.strategies.insert(strategy.name(), strategy);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn FormationStrategy>> {
        self.strategies.get(name).cloned().ok_or_else(|| {
            Error::config(
                "strategy",
                format!("unknown strategy `{name}`, expected one of: {}", self.names().join(", ")),
            )
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.strategies.keys().copied().collect()
    }
}

impl std::fmt::Debug for StrategyRegistry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_list().entries(self.names()).finish()
    }
}
