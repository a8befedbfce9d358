//! Coalition-formation engine: partitions of the SU set, head election,
//! merge and split passes, stability checks, and the strategy registry.

mod engine;
mod members;
mod merge;
mod split;
pub mod stability;
pub mod strategy;
pub mod trace;

use std::collections::BTreeMap;
use std::fmt;

pub use engine::{merge_split_until_stable, FormationOptions};
pub use members::{MemberSet, Members};
pub use merge::merge_pass;
pub use split::{split_pass, SplitMode};
pub use stability::{check_dc_conditions, find_dc_stable_partition, is_dhp_stable, DcReport, DcWitness};
pub use strategy::{Formation, FormationStrategy, StrategyRegistry};
pub use trace::{FormationEvent, FormationTrace};

use crate::error::{Error, Result};
use crate::game::{coalition_value, CoalitionValue, ExtReal, GameParams};
use crate::network::{Network, NodeId, Position};
use crate::sensing::{
    avg_snr, false_alarm_probability, fused_false_alarm, fused_missing, missing_probability,
    reporting_error_probability,
};

/// Non-cooperative missing probability of an SU at `d` meters from the PU.
/// An SU sitting on the PU detects it surely.
fn su_missing(network: &Network, d: f64) -> Result<f64> {
    let p = network.params();
    if d == 0.0 {
        return Ok(0.0);
    }
    missing_probability(avg_snr(p.pu_power, d, p)?, p.lambda, p.m)
}

/// Reporting error over `d` meters; co-located nodes report without error.
fn link_error(network: &Network, d: f64) -> Result<f64> {
    let p = network.params();
    if d == 0.0 {
        return Ok(0.0);
    }
    Ok(reporting_error_probability(avg_snr(p.su_report_power, d, p)?))
}

/// A network together with the game parameters and every per-SU and
/// per-link probability the engine needs, computed once.
#[derive(Debug, Clone)]
pub struct GameContext {
    network: Network,
    game: GameParams,
    pf: f64,
    pm: Vec<f64>,
    pe: Vec<f64>,
}

impl GameContext {
    pub fn new(network: Network, game: GameParams) -> Result<Self> {
        game.validate()?;
        let n = network.len();
        let params = *network.params();
        let pf = false_alarm_probability(params.lambda, params.m);
        let pm = network
            .ids()
            .map(|id| su_missing(&network, network.pu_distance(id)))
            .collect::<Result<Vec<_>>>()?;
        let mut pe = vec![0.0; n * n];
        for i in 1..=n {
            for k in (i + 1)..=n {
                let e = link_error(&network, network.su_distance(i, k))?;
                pe[(i - 1) * n + (k - 1)] = e;
                pe[(k - 1) * n + (i - 1)] = e;
            }
        }
        Ok(GameContext { network, game, pf, pm, pe })
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn game(&self) -> &GameParams {
        &self.game
    }

    pub fn alpha(&self) -> f64 {
        self.game.alpha
    }

    pub fn n(&self) -> usize {
        self.network.len()
    }

    /// Common non-cooperative false-alarm probability.
    pub fn pf(&self) -> f64 {
        self.pf
    }

    /// Non-cooperative missing probability of SU `id`.
    pub fn pm(&self, id: NodeId) -> f64 {
        self.pm[id - 1]
    }

    /// Reporting error from SU `from` to head `head`; zero when they coincide.
    pub fn pe(&self, from: NodeId, head: NodeId) -> f64 {
        self.pe[(from - 1) * self.n() + (head - 1)]
    }

    pub fn all(&self) -> MemberSet {
        MemberSet::full(self.n())
    }

    /// Lowest non-cooperative missing probability wins; ties go to the lowest id.
    pub fn head(&self, members: MemberSet) -> Option<NodeId> {
        let mut best: Option<NodeId> = None;
        for id in members {
            if best.is_none_or(|b| self.pm(id) < self.pm(b)) {
                best = Some(id);
            }
        }
        best
    }

    /// Elects the head and computes the fused probabilities and value. Panics on an empty set.
    pub fn evaluate(&self, members: MemberSet) -> Coalition {
        let head = self.head(members).expect("coalition must not be empty");
        let qm = fused_missing(members.iter().map(|i| (self.pm(i), self.pe(i, head))));
        let qf = fused_false_alarm(self.pf, members.iter().map(|i| self.pe(i, head)));
        Coalition {
            members,
            head,
            value: coalition_value(qm, qf, self.game.alpha),
        }
    }

    /// Values of every non-empty subset, indexed by bitmask (index 0 is unused).
    pub fn all_subsets(&self, limit: usize) -> Result<Vec<Option<Coalition>>> {
        let n = self.n();
        if n > limit {
            return Err(Error::Capacity {
                what: "number of SUs for subset enumeration",
                requested: n,
                limit,
            });
        }
        Ok((0u64..(1u64 << n))
            .map(|bits| (bits != 0).then(|| self.evaluate(MemberSet::from_bits(bits))))
            .collect())
    }

    pub fn centroid(&self, members: MemberSet) -> Position {
        let k = members.len() as f64;
        let (sx, sy) = members
            .iter()
            .map(|id| self.network.su(id))
            .fold((0.0, 0.0), |(x, y), p| (x + p.x, y + p.y));
        Position::new(sx / k, sy / k)
    }
}

/// Coalition head for `members` computed straight from the network.
pub fn select_head(members: MemberSet, network: &Network) -> Result<NodeId> {
    if members.is_empty() {
        return Err(Error::domain("cannot elect a head for an empty coalition"));
    }
    let mut best: Option<(NodeId, f64)> = None;
    for id in members {
        let pm = su_missing(network, network.pu_distance(id))?;
        if best.is_none_or(|(_, b)| pm < b) {
            best = Some((id, pm));
        }
    }
    Ok(best.unwrap().0)
}

/// Evaluates a coalition from first principles, without a [`GameContext`].
pub fn evaluate_coalition(members: MemberSet, network: &Network, game: &GameParams) -> Result<Coalition> {
    let head = select_head(members, network)?;
    let params = network.params();
    let pf = false_alarm_probability(params.lambda, params.m);
    let mut miss = Vec::with_capacity(members.len());
    let mut errs = Vec::with_capacity(members.len());
    for id in members {
        miss.push(su_missing(network, network.pu_distance(id))?);
        errs.push(if id == head {
            0.0
        } else {
            link_error(network, network.su_distance(id, head))?
        });
    }
    let qm = crate::sensing::coalition_missing_probability(&miss, &errs)?;
    let qf = crate::sensing::coalition_false_alarm_probability(pf, &errs)?;
    Ok(Coalition {
        members,
        head,
        value: coalition_value(qm, qf, game.alpha),
    })
}

/// A set of SUs with its elected head and cached probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coalition {
    pub members: MemberSet,
    pub head: NodeId,
    pub value: CoalitionValue,
}

impl Coalition {
    /// Utility of every member; the value is never divided.
    pub fn utility(&self) -> ExtReal {
        self.value.value
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn qm(&self) -> f64 {
        self.value.qm
    }

    pub fn qf(&self) -> f64 {
        self.value.qf
    }
}

/// Disjoint coalitions covering all SUs, kept sorted by lowest member id.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    coalitions: Vec<Coalition>,
}

impl Partition {
    pub fn singletons(ctx: &GameContext) -> Self {
        Partition {
            coalitions: ctx.network().ids().map(|id| ctx.evaluate(MemberSet::singleton(id))).collect(),
        }
    }

    pub fn grand(ctx: &GameContext) -> Self {
        Partition {
            coalitions: vec![ctx.evaluate(ctx.all())],
        }
    }

    /// Builds and evaluates a partition from member sets, checking that they
    /// are non-empty, disjoint and cover every SU.
    pub fn from_sets(ctx: &GameContext, sets: impl IntoIterator<Item = MemberSet>) -> Result<Self> {
        let sets: Vec<MemberSet> = sets.into_iter().collect();
        check_cover(&sets, ctx.n())?;
        Ok(Self::from_coalitions(sets.into_iter().map(|s| ctx.evaluate(s)).collect()))
    }

    pub(crate) fn from_coalitions(mut coalitions: Vec<Coalition>) -> Self {
        coalitions.sort_by_key(|c| c.members.min_id());
        Partition { coalitions }
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn into_coalitions(self) -> Vec<Coalition> {
        self.coalitions
    }

    pub fn sets(&self) -> Vec<MemberSet> {
        self.coalitions.iter().map(|c| c.members).collect()
    }

    pub fn len(&self) -> usize {
        self.coalitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coalitions.is_empty()
    }

    pub fn n_sus(&self) -> usize {
        self.coalitions.iter().map(Coalition::size).sum()
    }

    pub fn coalition_of(&self, id: NodeId) -> Option<&Coalition> {
        self.coalitions.iter().find(|c| c.members.contains(id))
    }

    /// Per-SU utilities: each member holds its coalition's value.
    pub fn utilities(&self) -> BTreeMap<NodeId, ExtReal> {
        self.coalitions
            .iter()
            .flat_map(|c| c.members.iter().map(move |id| (id, c.utility())))
            .collect()
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        check_cover(&self.sets(), n)
    }

    /// `sum |S| Q_m,S / N`, summed in order of lowest member id.
    pub fn avg_missing(&self) -> f64 {
        weighted_average(self.coalitions.iter().map(|c| (c.size(), c.qm())))
    }

    /// `sum |S| Q_f,S / N`, summed in order of lowest member id.
    pub fn avg_false_alarm(&self) -> f64 {
        weighted_average(self.coalitions.iter().map(|c| (c.size(), c.qf())))
    }

    pub fn max_size(&self) -> usize {
        self.coalitions.iter().map(Coalition::size).max().unwrap_or(0)
    }

    /// One line per coalition: `head_id:member_id,member_id,...`.
    pub fn snapshot(&self) -> String {
        let mut out = String::new();
        for c in &self.coalitions {
            let ids: Vec<String> = c.members.iter().map(|id| id.to_string()).collect();
            out.push_str(&format!("{}:{}\n", c.head, ids.join(",")));
        }
        out
    }

    /// Parses the [`Partition::snapshot`] format back into `(head, members)` pairs.
    pub fn parse_snapshot(text: &str) -> Result<Vec<(NodeId, MemberSet)>> {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|line| {
                let (head, members) = line
                    .split_once(':')
                    .ok_or_else(|| Error::domain(format!("snapshot line without head: {line}")))?;
                let head: NodeId = head
                    .trim()
                    .parse()
                    .map_err(|_| Error::domain(format!("bad head id in: {line}")))?;
                let set = members
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<NodeId>()
                            .map_err(|_| Error::domain(format!("bad member id in: {line}")))
                    })
                    .collect::<Result<MemberSet>>()?;
                Ok((head, set))
            })
            .collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, c) in self.coalitions.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{}", c.members)?;
        }
        f.write_str("}")
    }
}

/// `sum size * q / sum size`, accumulated in iteration order.
pub(crate) fn weighted_average(items: impl IntoIterator<Item = (usize, f64)>) -> f64 {
    let mut total = 0.0;
    let mut n = 0usize;
    for (size, q) in items {
        total += size as f64 * q;
        n += size;
    }
    total / n as f64
}

fn check_cover(sets: &[MemberSet], n: usize) -> Result<()> {
    let mut seen = MemberSet::EMPTY;
    for s in sets {
        if s.is_empty() {
            return Err(Error::domain("partition contains an empty coalition"));
        }
        if !s.is_disjoint(seen) {
            return Err(Error::domain(format!("coalition {s} overlaps another coalition")));
        }
        seen = seen.union(*s);
    }
    if seen != MemberSet::full(n) {
        return Err(Error::domain(format!(
            "partition covers {seen} but the network has {n} SUs"
        )));
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::network::RadioParams;
    use crate::sensing::lambda_for_target_pf;

    pub fn params_for_pf(pf: f64) -> RadioParams {
        RadioParams::with_lambda(lambda_for_target_pf(pf, 5).unwrap())
    }

    /// PU at the origin, SUs at the given points, default radio parameters.
    pub fn ctx(points: &[(f64, f64)], pf: f64) -> GameContext {
        let sus = points.iter().map(|&(x, y)| Position::new(x, y)).collect();
        let net = Network::new(Position::new(0.0, 0.0), sus, params_for_pf(pf)).unwrap();
        GameContext::new(net, GameParams::default()).unwrap()
    }

    pub fn set(ids: &[NodeId]) -> MemberSet {
        ids.iter().copied().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::test_support::*;
    use super::*;

    #[test]
    fn head_is_nearest_to_pu() {
        let c = ctx(&[(1500.0, 0.0), (900.0, 0.0)], 0.01);
        assert!(c.pm(2) < c.pm(1));
        assert_eq!(select_head(set(&[1, 2]), c.network()).unwrap(), 2);
        assert_eq!(c.head(set(&[1, 2])), Some(2));
        assert_eq!(select_head(set(&[1]), c.network()).unwrap(), 1);
        assert!(select_head(MemberSet::EMPTY, c.network()).is_err());
    }

    #[test]
    fn head_tie_goes_to_lowest_id() {
        let c = ctx(&[(0.0, 1000.0), (1000.0, 0.0), (0.0, -1000.0)], 0.01);
        assert_eq!(c.pm(1), c.pm(2));
        assert_eq!(select_head(set(&[2, 3, 1]), c.network()).unwrap(), 1);
        assert_eq!(select_head(set(&[3, 2]), c.network()).unwrap(), 2);
    }

    #[test]
    fn singleton_evaluation() {
        let c = ctx(&[(1200.0, 300.0)], 0.01);
        let s = c.evaluate(set(&[1]));
        assert_eq!(s.qm(), c.pm(1));
        assert!((s.qf() - c.pf()).abs() < 1e-15);
        assert_eq!(s.utility(), coalition_value(s.qm(), s.qf(), 0.1).value);
    }

    #[test]
    fn context_and_direct_evaluation_agree() {
        let c = ctx(&[(1200.0, 300.0), (1300.0, 500.0), (800.0, -200.0), (-900.0, 100.0)], 0.02);
        for bits in 1u64..16 {
            let s = MemberSet::from_bits(bits);
            let a = c.evaluate(s);
            let b = evaluate_coalition(s, c.network(), c.game()).unwrap();
            assert_eq!(a.head, b.head);
            assert!((a.qm() - b.qm()).abs() < 1e-15);
            assert!((a.qf() - b.qf()).abs() < 1e-15);
        }
    }

    #[test]
    fn co_located_pair_hand_evaluation() {
        // Two SUs on the same spot have a perfect reporting link, so with
        // P_m = (p1, p2): Q_m = p1 p2 and Q_f = 1 - (1 - P_f)^2.
        let c = ctx(&[(1000.0, 0.0), (1000.0, 0.0)], 0.01);
        assert_eq!(c.pe(1, 2), 0.0);
        let pair = c.evaluate(set(&[1, 2]));
        assert!((pair.qm() - c.pm(1) * c.pm(2)).abs() < 1e-17);
        assert!((pair.qf() - 0.0199).abs() < 1e-15);
        let expected = (1.0 - pair.qm()) - crate::game::cost(pair.qf(), 0.1).finite().unwrap();
        assert!((pair.utility().finite().unwrap() - expected).abs() < 1e-15);
    }

    #[test]
    fn infeasible_coalition_has_neg_inf_value() {
        let c = ctx(&[(1000.0, 0.0), (1000.0, 0.0), (1000.0, 0.0)], 0.05);
        assert_eq!(c.evaluate(c.all()).utility(), ExtReal::NegInf);
    }

    #[test]
    fn partition_validation() {
        let c = ctx(&[(1000.0, 0.0), (900.0, 0.0), (800.0, 0.0)], 0.01);
        assert!(Partition::from_sets(&c, [set(&[1, 2]), set(&[3])]).is_ok());
        assert!(Partition::from_sets(&c, [set(&[1, 2]), set(&[2, 3])]).is_err());
        assert!(Partition::from_sets(&c, [set(&[1, 2])]).is_err());
        assert!(Partition::from_sets(&c, [set(&[1, 2, 3]), MemberSet::EMPTY]).is_err());
    }

    #[test]
    fn snapshot_format() {
        let c = ctx(&[(1000.0, 0.0), (900.0, 0.0), (800.0, 0.0)], 0.01);
        let p = Partition::from_sets(&c, [set(&[3]), set(&[1, 2])]).unwrap();
        assert_eq!(p.snapshot(), "2:1,2\n3:3\n");
        let parsed = Partition::parse_snapshot(&p.snapshot()).unwrap();
        assert_eq!(parsed, vec![(2, set(&[1, 2])), (3, set(&[3]))]);
        assert_eq!(p.to_string(), "{[1,2] [3]}");
    }

    #[test]
    fn weighted_average_matches_per_su_average() {
        let c = ctx(&[(1000.0, 0.0), (900.0, 50.0), (-800.0, 0.0), (0.0, 1400.0)], 0.01);
        let p = Partition::from_sets(&c, [set(&[1, 2]), set(&[3, 4])]).unwrap();
        let per_su: f64 = c
            .network()
            .ids()
            .map(|id| p.coalition_of(id).unwrap().qm())
            .sum::<f64>()
            / 4.0;
        assert!((per_su - p.avg_missing()).abs() < 1e-15);
    }
}
