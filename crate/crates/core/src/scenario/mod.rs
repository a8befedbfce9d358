//! Experiments: random deployments, sweeps over network size and false-alarm
//! target, mobility runs and Monte-Carlo validation of the fusion formulas.
//!
//! Every random draw comes from a ChaCha stream selected by
//! `(seed, drop index)`, so sweeps give identical results whatever the
//! number of worker threads.

mod config;
mod mobility;
mod montecarlo;
mod output;

pub use config::{default_pf_grid, ScenarioConfig};
pub use mobility::{mobility_run, MobilitySample, MobilityTrace, Mover, Trajectory};
pub use montecarlo::{monte_carlo_validate, validate_random_coalitions, McEstimate, ValidationRow};
pub use output::{metrics_csv, mobility_csv, validation_csv, write_atomic};

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::formation::{FormationStrategy, GameContext, Partition, StrategyRegistry};
use crate::game::{max_coalition_size, GameParams};
use crate::network::{Network, Position};
use crate::oracle::optimal_partition;
use crate::sensing::lambda_for_target_pf;

/// Deterministic random stream for one drop.
pub fn cell_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Drops `n` SUs uniformly over the square. The PU sits at the configured
/// position (the centre by default). The detector threshold is set for the
/// first `pf_grid` entry.
pub fn deploy_random_n(config: &ScenarioConfig, n: usize, drop_index: u64) -> Result<Network> {
    let mut rng = cell_rng(config.seed, drop_index);
    let side = config.area_side;
    let sus = (0..n)
        .map(|_| Position::new(rng.gen_range(0.0..=side), rng.gen_range(0.0..=side)))
        .collect();
    let lambda = lambda_for_target_pf(config.pf_grid[0], config.m)?;
    Network::new(config.pu(), sus, config.radio(lambda))
}

/// [`deploy_random_n`] with `config.n_sus` SUs, or the fixed positions when given.
pub fn deploy_random(config: &ScenarioConfig, drop_index: u64) -> Result<Network> {
    match &config.su_positions {
        Some(sus) => {
            let lambda = lambda_for_target_pf(config.pf_grid[0], config.m)?;
            Network::new(config.pu(), sus.clone(), config.radio(lambda))
        }
        None => deploy_random_n(config, config.n_sus, drop_index),
    }
}

/// Aggregate outcome of one way of partitioning the network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub avg_missing: f64,
    pub avg_false_alarm: f64,
    pub max_size: usize,
    pub coalitions: usize,
}

impl Summary {
    fn of(p: &Partition) -> Self {
        Summary {
            avg_missing: p.avg_missing(),
            avg_false_alarm: p.avg_false_alarm(),
            max_size: p.max_size(),
            coalitions: p.len(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub noncoop: Summary,
    pub distributed: Summary,
    pub centralized: Option<Summary>,
    pub distributed_partition: Partition,
    pub centralized_partition: Option<Partition>,
}

#[derive(Clone)]
pub struct RunOptions {
    pub strategy: Arc<dyn FormationStrategy>,
    /// Run the centralized oracle when the network has at most this many SUs.
    pub centralized_cap: Option<usize>,
}

impl RunOptions {
    pub fn from_config(config: &ScenarioConfig) -> Result<Self> {
        let registry = StrategyRegistry::with_builtins(config.centralized_cap);
        Ok(RunOptions {
            strategy: registry.get(&config.strategy)?,
            centralized_cap: config.centralized.then_some(config.centralized_cap),
        })
    }
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            strategy: Arc::new(crate::formation::strategy::MergeSplit::default()),
            centralized_cap: Some(crate::oracle::ENUMERATION_LIMIT),
        }
    }
}

/// Non-cooperative, distributed and (for small N) centralized metrics of one
/// network. The distributed run starts from all singletons.
pub fn run_instance(network: &Network, game: &GameParams, options: &RunOptions) -> Result<InstanceOutcome> {
    let ctx = GameContext::new(network.clone(), *game)?;
    run_in_context(&ctx, options)
}

pub fn run_in_context(ctx: &GameContext, options: &RunOptions) -> Result<InstanceOutcome> {
    let singletons = Partition::singletons(ctx);
    let noncoop = Summary::of(&singletons);
    let formed = options.strategy.form(ctx, singletons)?;
    let centralized_partition = match options.centralized_cap {
        Some(cap) if ctx.n() <= cap => Some(optimal_partition(ctx, cap)?.partition),
        _ => None,
    };
    Ok(InstanceOutcome {
        noncoop,
        distributed: Summary::of(&formed.partition),
        centralized: centralized_partition.as_ref().map(Summary::of),
        distributed_partition: formed.partition,
        centralized_partition,
    })
}

/// One evaluated (N, pf, drop) cell of a sweep.
#[derive(Debug, Clone)]
pub struct Cell {
    pub n: usize,
    pub pf: f64,
    pub drop: u64,
    pub mmax: usize,
    pub outcome: InstanceOutcome,
}

/// Every cell for network size `n` over `pfs` and all drops, ordered by (pf, drop).
///
/// Drops run in parallel on the current rayon pool; each drop reuses one
/// deployment for all pf values.
pub fn sweep_cells(config: &ScenarioConfig, n: usize, pfs: &[f64]) -> Result<Vec<Cell>> {
    config.validate()?;
    let options = RunOptions::from_config(config)?;
    let game = config.game();
    let lambdas: Vec<f64> = pfs
        .iter()
        .map(|&pf| lambda_for_target_pf(pf, config.m))
        .collect::<Result<_>>()?;
    let per_drop: Vec<Vec<Cell>> = (0..config.drops as u64)
        .into_par_iter()
        .map(|drop| {
            let base = if config.su_positions.is_some() {
                deploy_random(config, drop)?
            } else {
                deploy_random_n(config, n, drop)?
            };
            pfs.iter()
                .zip(&lambdas)
                .map(|(&pf, &lambda)| {
                    let ctx = GameContext::new(base.with_params(config.radio(lambda))?, game)?;
                    Ok(Cell {
                        n,
                        pf,
                        drop,
                        mmax: max_coalition_size(game.alpha, pf)?,
                        outcome: run_in_context(&ctx, &options)?,
                    })
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    let mut cells: Vec<Cell> = per_drop.into_iter().flatten().collect();
    cells.sort_by(|a, b| a.pf.total_cmp(&b.pf).then(a.drop.cmp(&b.drop)));
    Ok(cells)
}

/// One row of sweep output.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub n_sus: usize,
    /// `None` when the row averages over the whole pf grid.
    pub pf_target: Option<f64>,
    pub avg_missing_noncoop: f64,
    pub avg_missing_distributed: f64,
    pub avg_missing_centralized: Option<f64>,
    pub avg_falsealarm_noncoop: f64,
    pub avg_falsealarm_distributed: f64,
    pub avg_falsealarm_centralized: Option<f64>,
    pub max_coalition_size_observed: usize,
    pub avg_max_coalition_size: f64,
    /// Coalition-size bound; for grid-averaged rows, the bound at the smallest pf.
    pub mmax_bound: usize,
}

impl MetricsRecord {
    /// Relative reduction of the average missing probability, distributed vs non-cooperative.
    pub fn miss_reduction(&self) -> f64 {
        1.0 - self.avg_missing_distributed / self.avg_missing_noncoop
    }

    /// Mean over cells, in cell order.
    pub fn aggregate(cells: &[Cell], pf_target: Option<f64>) -> Self {
        let k = cells.len() as f64;
        let mean = |f: &dyn Fn(&Cell) -> f64| cells.iter().map(f).sum::<f64>() / k;
        let all_central = cells.iter().all(|c| c.outcome.centralized.is_some());
        let central = |f: fn(&Summary) -> f64| {
            all_central.then(|| mean(&|c: &Cell| f(c.outcome.centralized.as_ref().unwrap())))
        };
        MetricsRecord {
            n_sus: cells[0].n,
            pf_target,
            avg_missing_noncoop: mean(&|c| c.outcome.noncoop.avg_missing),
            avg_missing_distributed: mean(&|c| c.outcome.distributed.avg_missing),
            avg_missing_centralized: central(|s| s.avg_missing),
            avg_falsealarm_noncoop: mean(&|c| c.outcome.noncoop.avg_false_alarm),
            avg_falsealarm_distributed: mean(&|c| c.outcome.distributed.avg_false_alarm),
            avg_falsealarm_centralized: central(|s| s.avg_false_alarm),
            max_coalition_size_observed: cells.iter().map(|c| c.outcome.distributed.max_size).max().unwrap_or(0),
            avg_max_coalition_size: mean(&|c| c.outcome.distributed.max_size as f64),
            mmax_bound: cells.iter().map(|c| c.mmax).max().unwrap_or(1),
        }
    }
}

/// One record per network size, averaged over drops and the pf grid.
pub fn sweep_network_size(config: &ScenarioConfig, n_list: &[usize]) -> Result<Vec<MetricsRecord>> {
    n_list
        .iter()
        .map(|&n| {
            let cells = sweep_cells(config, n, &config.pf_grid)?;
            Ok(MetricsRecord::aggregate(&cells, None))
        })
        .collect()
}

/// One record per pf target at fixed network size.
pub fn sweep_pf(config: &ScenarioConfig, n_fixed: usize) -> Result<Vec<MetricsRecord>> {
    let cells = sweep_cells(config, n_fixed, &config.pf_grid)?;
    Ok(config
        .pf_grid
        .iter()
        .map(|&pf| {
            let subset: Vec<Cell> = cells.iter().filter(|c| c.pf == pf).cloned().collect();
            MetricsRecord::aggregate(&subset, Some(pf))
        })
        .collect())
}
