//! The non-transferable-utility coalitional game played by the SUs.
//!
//! A coalition's value is its detection probability minus a logarithmic
//! barrier cost on its false-alarm probability. The barrier is infinite at
//! and above `alpha`, so values live on the extended real line; every
//! member of a coalition receives the whole value as its own utility.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NodeId;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    /// Largest tolerable false-alarm probability of a coalition, in (0, 1).
    pub alpha: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams { alpha: 0.1 }
    }
}

impl GameParams {
    pub fn new(alpha: f64) -> Result<Self> {
        let p = GameParams { alpha };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::config("alpha", format!("must lie in (0, 1), got {}", self.alpha)));
        }
        Ok(())
    }
}

/// A real number or one of the two infinities, totally ordered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    NegInf,
    Finite(f64),
    PosInf,
}

impl ExtReal {
    /// Maps `±inf` to the tagged infinities. Panics on NaN.
    pub fn from_f64(v: f64) -> Self {
        assert!(!v.is_nan(), "ExtReal cannot hold NaN");
        if v == f64::INFINITY {
            ExtReal::PosInf
        } else if v == f64::NEG_INFINITY {
            ExtReal::NegInf
        } else {
            ExtReal::Finite(v)
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtReal::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            ExtReal::NegInf => f64::NEG_INFINITY,
            ExtReal::Finite(v) => v,
            ExtReal::PosInf => f64::INFINITY,
        }
    }

    fn rank(&self) -> u8 {
        match self {
            ExtReal::NegInf => 0,
            ExtReal::Finite(_) => 1,
            ExtReal::PosInf => 2,
        }
    }
}

impl Eq for ExtReal {}

impl Ord for ExtReal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtReal::Finite(a), ExtReal::Finite(b)) => a.partial_cmp(b).expect("ExtReal holds no NaN"),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for ExtReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtReal::NegInf => f.write_str("-inf"),
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PosInf => f.write_str("inf"),
        }
    }
}

/// Barrier cost of a coalition false-alarm probability `qf`:
/// `-alpha^2 ln(1 - (qf/alpha)^2)` below `alpha`, `+inf` at or above it.
pub fn cost(qf: f64, alpha: f64) -> ExtReal {
    if qf >= alpha {
        return ExtReal::PosInf;
    }
    let r = qf / alpha;
    ExtReal::Finite(-alpha * alpha * (-r * r).ln_1p())
}

/// Cached outcome of evaluating a coalition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoalitionValue {
    pub qm: f64,
    pub qf: f64,
    pub value: ExtReal,
}

impl CoalitionValue {
    pub fn detection(&self) -> f64 {
        1.0 - self.qm
    }
}

/// `v(S) = (1 - qm) - cost(qf)`; `-inf` exactly when `qf >= alpha`.
pub fn coalition_value(qm: f64, qf: f64, alpha: f64) -> CoalitionValue {
    let value = match cost(qf, alpha) {
        ExtReal::Finite(c) => ExtReal::Finite((1.0 - qm) - c),
        _ => ExtReal::NegInf,
    };
    CoalitionValue { qm, qf, value }
}

/// Pareto order over `(new, old)` utility pairs: nobody worse off, somebody
/// strictly better. Exact comparisons, no tolerance.
pub(crate) fn pareto_improves(pairs: impl IntoIterator<Item = (ExtReal, ExtReal)>) -> bool {
    let mut strict = false;
    for (new, old) in pairs {
        match new.cmp(&old) {
            Ordering::Less => return false,
            Ordering::Greater => strict = true,
            Ordering::Equal => {}
        }
    }
    strict
}

/// Whether the collection giving utilities `r_utils` is Pareto-preferred to
/// the one giving `s_utils`. Both maps must cover the same players.
pub fn pareto_preferred(
    r_utils: &BTreeMap<NodeId, ExtReal>,
    s_utils: &BTreeMap<NodeId, ExtReal>,
) -> Result<bool> {
    if r_utils.len() != s_utils.len() || r_utils.keys().zip(s_utils.keys()).any(|(a, b)| a != b) {
        return Err(Error::domain("Pareto comparison needs identical player sets"));
    }
    Ok(pareto_improves(r_utils.values().copied().zip(s_utils.values().copied())))
}

/// Largest coalition that can keep its false alarm below `alpha` with
/// perfect reporting: `floor(ln(1 - alpha) / ln(1 - pf))`, at least 1.
pub fn max_coalition_size(alpha: f64, pf: f64) -> Result<usize> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if !(pf > 0.0 && pf < 1.0) {
        return Err(Error::domain(format!("pf must lie in (0, 1), got {pf}")));
    }
    let ratio = (-alpha).ln_1p() / (-pf).ln_1p();
    Ok((ratio.floor() as usize).max(1))
}
