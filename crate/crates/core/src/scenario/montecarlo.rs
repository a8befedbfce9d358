use rand::seq::SliceRandom;
use rand::Rng;

use super::{cell_rng, deploy_random, ScenarioConfig};
use crate::error::Result;
use crate::formation::{Coalition, GameContext, MemberSet};
use crate::network::NodeId;
use crate::sensing::lambda_for_target_pf;

/// Empirical OR-fusion rates with binomial standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub qm: f64,
    pub qf: f64,
    pub qm_stderr: f64,
    pub qf_stderr: f64,
    pub trials: u64,
}

/// Bit-level simulation of one coalition's sensing round.
///
/// Per trial and per member a local decision is drawn (a miss with `P_m,i`
/// when the PU is present, a false alarm with `P_f` when it is absent), each
/// non-head member's bit is flipped with its reporting error, and the head
/// ORs the bits it holds.
pub fn monte_carlo_validate(coalition: &Coalition, ctx: &GameContext, trials: u64, seed: u64) -> McEstimate {
    let trials = trials.max(1);
    let mut rng = cell_rng(seed, 0);
    let members: Vec<(f64, f64)> = coalition
        .members
        .iter()
        .map(|id| (ctx.pm(id), ctx.pe(id, coalition.head)))
        .collect();
    let pf = ctx.pf();

    let mut misses = 0u64;
    let mut alarms = 0u64;
    for _ in 0..trials {
        let mut heard = false;
        for &(pm, pe) in &members {
            let local = rng.gen::<f64>() >= pm;
            let flipped = rng.gen::<f64>() < pe;
            heard |= local ^ flipped;
        }
        if !heard {
            misses += 1;
        }
        let mut heard = false;
        for &(_, pe) in &members {
            let local = rng.gen::<f64>() < pf;
            let flipped = rng.gen::<f64>() < pe;
            heard |= local ^ flipped;
        }
        if heard {
            alarms += 1;
        }
    }
    let n = trials as f64;
    let qm = misses as f64 / n;
    let qf = alarms as f64 / n;
    McEstimate {
        qm,
        qf,
        qm_stderr: (qm * (1.0 - qm) / n).sqrt(),
        qf_stderr: (qf * (1.0 - qf) / n).sqrt(),
        trials,
    }
}

/// Closed form against simulation for one coalition.
#[derive(Debug, Clone)]
pub struct ValidationRow {
    pub index: usize,
    pub members: MemberSet,
    pub head: NodeId,
    pub analytic: Coalition,
    pub estimate: McEstimate,
}

impl ValidationRow {
    /// Standard error of a binomial rate `p` over the row's trial count.
    pub fn null_stderr(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.estimate.trials as f64).sqrt()
    }

    /// Whether both rates fall within `k` standard errors (taken at the
    /// closed-form value) of the closed form.
    pub fn within(&self, k: f64) -> bool {
        let ok = |analytic: f64, empirical: f64| {
            let se = self.null_stderr(analytic);
            if se == 0.0 {
                empirical == analytic
            } else {
                (empirical - analytic).abs() < k * se
            }
        };
        ok(self.analytic.qm(), self.estimate.qm) && ok(self.analytic.qf(), self.estimate.qf)
    }
}

/// Draws `count` random coalitions (network `i` from drop `i`, pf cycling
/// through the grid, 1 to 6 members) and simulates each for `trials` rounds.
pub fn validate_random_coalitions(config: &ScenarioConfig, count: usize, trials: u64) -> Result<Vec<ValidationRow>> {
    (0..count)
        .map(|index| {
            let pf = config.pf_grid[index % config.pf_grid.len()];
            let base = deploy_random(config, index as u64)?;
            let net = base.with_params(config.radio(lambda_for_target_pf(pf, config.m)?))?;
            let ctx = GameContext::new(net, config.game())?;
            let mut rng = cell_rng(config.seed ^ 0x9e37_79b9_7f4a_7c15, index as u64);
            let mut ids: Vec<NodeId> = ctx.network().ids().collect();
            ids.shuffle(&mut rng);
            let size = rng.gen_range(1..=ids.len().min(6));
            let members: MemberSet = ids[..size].iter().copied().collect();
            let analytic = ctx.evaluate(members);
            let estimate = monte_carlo_validate(&analytic, &ctx, trials, config.seed.wrapping_add(index as u64));
            Ok(ValidationRow {
                index,
                members,
                head: analytic.head,
                analytic,
                estimate,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formation::test_support::*;

    #[test]
    fn single_member_reproduces_pm() {
        let c = ctx(&[(1500.0, 0.0)], 0.01);
        let k = c.evaluate(set(&[1]));
        let est = monte_carlo_validate(&k, &c, 1_000_000, 7);
        let se = (k.qm() * (1.0 - k.qm()) / 1e6).sqrt();
        assert!((est.qm - k.qm()).abs() < 4.0 * se);
        assert!((0.0..=1.0).contains(&est.qm) && (0.0..=1.0).contains(&est.qf));
    }

    #[test]
    fn deterministic_for_a_seed() {
        let c = ctx(&[(1500.0, 0.0), (1600.0, 100.0)], 0.05);
        let k = c.evaluate(c.all());
        assert_eq!(monte_carlo_validate(&k, &c, 1000, 3), monte_carlo_validate(&k, &c, 1000, 3));
    }
}
