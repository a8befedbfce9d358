//! Radio constants, node positions and the deployed network.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node identifier of a secondary user. Ids run contiguously from 1 to N.
pub type NodeId = usize;

/// Largest number of SUs a [`Network`] may hold; member sets are 64-bit masks.
pub const MAX_SUS: usize = 64;

/// Physical constants shared by every node.
///
/// Powers and noise are in mW; distances are in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    pub pu_power: f64,
    pub su_report_power: f64,
    pub noise: f64,
    pub kappa: f64,
    pub mu: f64,
    /// Time-bandwidth product of the energy detector.
    pub m: u32,
    /// Energy-detection threshold, common to all SUs.
    pub lambda: f64,
}

impl RadioParams {
    /// PU 100 mW, SU reporting 10 mW, noise -90 dBm, kappa 1, mu 3, m 5.
    pub fn with_lambda(lambda: f64) -> Self {
        RadioParams {
            pu_power: 100.0,
            su_report_power: 10.0,
            noise: 1e-9,
            kappa: 1.0,
            mu: 3.0,
            m: 5,
            lambda,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("pu_power", self.pu_power),
            ("su_report_power", self.su_report_power),
            ("noise", self.noise),
            ("kappa", self.kappa),
            ("lambda", self.lambda),
        ];
        for (key, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(key, format!("must be finite and > 0, got {value}")));
            }
        }
        if !(self.mu.is_finite() && self.mu >= 2.0) {
            return Err(Error::config("mu", format!("must be >= 2, got {}", self.mu)));
        }
        if self.m < 2 {
            return Err(Error::config("m", format!("must be >= 2, got {}", self.m)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Position { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// A single PU and N secondary users. SU `i` (1-based) is stored at `sus[i - 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    pu: Position,
    sus: Vec<Position>,
    params: RadioParams,
}

impl Network {
    pub fn new(pu: Position, sus: Vec<Position>, params: RadioParams) -> Result<Self> {
        params.validate()?;
        if sus.is_empty() {
            return Err(Error::domain("a network needs at least one SU"));
        }
        if sus.len() > MAX_SUS {
            return Err(Error::Capacity {
                what: "number of SUs",
                requested: sus.len(),
                limit: MAX_SUS,
            });
        }
        if !pu.is_finite() {
            return Err(Error::domain("PU position must be finite"));
        }
        if let Some(i) = sus.iter().position(|p| !p.is_finite()) {
            return Err(Error::domain(format!("SU {} has a non-finite position", i + 1)));
        }
        Ok(Network { pu, sus, params })
    }

    pub fn len(&self) -> usize {
        self.sus.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sus.is_empty()
    }

    pub fn params(&self) -> &RadioParams {
        &self.params
    }

    pub fn pu(&self) -> Position {
        self.pu
    }

    pub fn su(&self, id: NodeId) -> Position {
        self.sus[id - 1]
    }

    pub fn sus(&self) -> &[Position] {
        &self.sus
    }

    /// `(node_id, position)` pairs in id order.
    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, Position)> + '_ {
        self.sus.iter().enumerate().map(|(i, p)| (i + 1, *p))
    }

    pub fn ids(&self) -> std::ops::RangeInclusive<NodeId> {
        1..=self.sus.len()
    }

    pub fn pu_distance(&self, id: NodeId) -> f64 {
        self.su(id).distance(&self.pu)
    }

    pub fn su_distance(&self, a: NodeId, b: NodeId) -> f64 {
        self.su(a).distance(&self.su(b))
    }

    pub fn with_params(&self, params: RadioParams) -> Result<Self> {
        Network::new(self.pu, self.sus.clone(), params)
    }

    pub fn set_su_position(&mut self, id: NodeId, pos: Position) -> Result<()> {
        if id == 0 || id > self.sus.len() {
            return Err(Error::domain(format!("no SU with id {id}")));
        }
        if !pos.is_finite() {
            return Err(Error::domain(format!("SU {id} moved to a non-finite position")));
        }
        self.sus[id - 1] = pos;
        Ok(())
    }

    pub fn set_pu_position(&mut self, pos: Position) -> Result<()> {
        if !pos.is_finite() {
            return Err(Error::domain("PU moved to a non-finite position"));
        }
        self.pu = pos;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_bad_params() {
        let params = RadioParams::with_lambda(16.0);
        assert!(Network::new(Position::new(0.0, 0.0), vec![], params).is_err());

        let mut bad = params;
        bad.m = 1;
        assert!(matches!(bad.validate(), Err(Error::Config { key, .. }) if key == "m"));
        let mut bad = params;
        bad.noise = 0.0;
        assert!(matches!(bad.validate(), Err(Error::Config { key, .. }) if key == "noise"));
    }

    #[test]
    fn ids_are_one_based() {
        let net = Network::new(
            Position::new(0.0, 0.0),
            vec![Position::new(3.0, 4.0), Position::new(0.0, 1.0)],
            RadioParams::with_lambda(16.0),
        )
        .unwrap();
        assert_eq!(net.ids().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(net.pu_distance(1), 5.0);
        assert_eq!(net.su_distance(1, 2), 3.0f64.hypot(3.0));
    }

    #[test]
    fn moving_off_the_map_is_an_error() {
        let mut net = Network::new(
            Position::new(0.0, 0.0),
            vec![Position::new(1.0, 1.0)],
            RadioParams::with_lambda(16.0),
        )
        .unwrap();
        assert!(net.set_su_position(1, Position::new(f64::INFINITY, 0.0)).is_err());
        assert!(net.set_su_position(2, Position::new(0.0, 0.0)).is_err());
    }
}
