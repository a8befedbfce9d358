use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::formation::{FormationEvent, FormationStrategy, GameContext, Partition};
use crate::game::{ExtReal, GameParams};
use crate::network::{Network, NodeId, Position};

/// The node that moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mover {
    Pu,
    Su(NodeId),
}

/// Straight-line motion: `n_steps` ticks of `step_m` meters along `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Trajectory {
    pub mover: Mover,
    pub direction: (f64, f64),
    pub step_m: f64,
    pub n_steps: usize,
}

#[derive(Debug, Clone)]
pub struct MobilitySample {
    pub step: usize,
    pub displacement_m: f64,
    pub partition: Partition,
    pub utilities: BTreeMap<NodeId, ExtReal>,
    /// Whether coalition formation ran at this tick.
    pub reformed: bool,
    pub events: Vec<FormationEvent>,
}

#[derive(Debug, Clone, Default)]
pub struct MobilityTrace {
    pub samples: Vec<MobilitySample>,
}

/// Moves one node tick by tick. Coalitions first form from singletons at
/// step 0; afterwards every tick re-evaluates the current coalitions (heads
/// are re-elected) and every `theta_steps` ticks `strategy` runs again
/// starting from them.
pub fn mobility_run(
    network: &Network,
    trajectory: Trajectory,
    theta_steps: usize,
    game: &GameParams,
    strategy: &dyn FormationStrategy,
) -> Result<MobilityTrace> {
    if theta_steps == 0 {
        return Err(Error::domain("theta_steps must be >= 1"));
    }
    if trajectory.n_steps == 0 {
        return Err(Error::domain("a trajectory needs at least one step"));
    }
    let (dx, dy) = trajectory.direction;
    let norm = dx.hypot(dy);
    if !(norm.is_finite() && norm > 0.0) || !trajectory.step_m.is_finite() {
        return Err(Error::domain("direction must be a finite non-zero vector"));
    }
    let start = match trajectory.mover {
        Mover::Pu => network.pu(),
        Mover::Su(id) if (1..=network.len()).contains(&id) => network.su(id),
        Mover::Su(id) => return Err(Error::domain(format!("no SU with id {id}"))),
    };

    let mut net = network.clone();
    let ctx = GameContext::new(net.clone(), *game)?;
    let formed = strategy.form(&ctx, Partition::singletons(&ctx))?;
    let mut samples = vec![MobilitySample {
        step: 0,
        displacement_m: 0.0,
        utilities: formed.partition.utilities(),
        partition: formed.partition,
        reformed: true,
        events: formed.trace.events,
    }];

    for step in 1..=trajectory.n_steps {
        let travelled = trajectory.step_m * step as f64;
        let pos = Position::new(start.x + dx / norm * travelled, start.y + dy / norm * travelled);
        match trajectory.mover {
            Mover::Pu => net.set_pu_position(pos)?,
            Mover::Su(id) => net.set_su_position(id, pos)?,
        }
        let ctx = GameContext::new(net.clone(), *game)?;
        let previous = samples.last().unwrap().partition.sets();
        let mut partition = Partition::from_sets(&ctx, previous)?;
        let reformed = step % theta_steps == 0;
        let mut events = Vec::new();
        if reformed {
            let formed = strategy.form(&ctx, partition)?;
            partition = formed.partition;
            events = formed.trace.events;
        }
        samples.push(MobilitySample {
            step,
            displacement_m: travelled,
            utilities: partition.utilities(),
            partition,
            reformed,
            events,
        });
    }
    Ok(MobilityTrace { samples })
}
