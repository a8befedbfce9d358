use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::GameParams;
use crate::network::{Position, RadioParams, MAX_SUS};
use crate::oracle::{ENUMERATION_LIMIT, EXTENDED_LIMIT};

/// Flat experiment configuration, read from JSON. Every field has a default,
/// and the defaults reproduce the reference experimental regime: a 3 km
/// square with the PU at its centre, PU 100 mW, SU reporting 10 mW,
/// noise -90 dBm, kappa 1, mu 3, m 5, alpha 0.1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    /// Network size for single-size runs (`sweep-pf`, `snapshot`, `mobility`, `validate`).
    pub n_sus: usize,
    /// Network sizes for `sweep-n`.
    pub n_list: Vec<usize>,
    /// Side of the square deployment area, meters.
    pub area_side: f64,
    /// PU position; `None` puts it at the centre of the area.
    pub pu_position: Option<Position>,
    /// Fixed SU positions; when set they replace random deployment and fix `n_sus`.
    pub su_positions: Option<Vec<Position>>,
    pub pu_power: f64,
    pub su_report_power: f64,
    pub noise: f64,
    pub kappa: f64,
    pub mu: f64,
    pub m: u32,
    pub alpha: f64,
    pub seed: u64,
    /// Random deployments per (N, pf) cell.
    pub drops: usize,
    /// Non-cooperative false-alarm targets, each strictly inside (0, alpha).
    pub pf_grid: Vec<f64>,
    /// Formation strategy for the distributed columns.
    pub strategy: String,
    /// Whether to run the exact centralized oracle where N allows it.
    pub centralized: bool,
    pub centralized_cap: usize,
    /// Worker threads for sweeps; `None` uses every core.
    pub threads: Option<usize>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            n_sus: 7,
            n_list: vec![5, 10, 15, 20, 25, 30],
            area_side: 3000.0,
            pu_position: None,
            su_positions: None,
            pu_power: 100.0,
            su_report_power: 10.0,
            noise: 1e-9,
            kappa: 1.0,
            mu: 3.0,
            m: 5,
            alpha: 0.1,
            seed: 1,
            drops: 500,
            pf_grid: default_pf_grid(),
            strategy: "merge-split".to_string(),
            centralized: true,
            centralized_cap: ENUMERATION_LIMIT,
            threads: None,
        }
    }
}

/// 0.005, 0.01, 0.02, ..., 0.09, 0.095.
pub fn default_pf_grid() -> Vec<f64> {
    let mut grid = vec![0.005];
    grid.extend((1..=9).map(|k| k as f64 / 100.0));
    grid.push(0.095);
    grid
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::config("<json>", e.to_string()))?;
        Self::from_value(value)
    }

    /// Deserialises and validates, naming the offending key on failure.
    pub fn from_value(value: serde_json::Value) -> Result<Self> {
        let config: ScenarioConfig = serde_json::from_value(value).map_err(|e| {
            let msg = e.to_string();
            let key = msg
                .split('`')
                .nth(1)
                .filter(|_| msg.starts_with("unknown field") || msg.starts_with("missing field"))
                .unwrap_or("<json>")
                .to_string();
            Error::config(key, msg)
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    /// Radio constants with detector threshold `lambda`.
    pub fn radio(&self, lambda: f64) -> RadioParams {
        RadioParams {
            pu_power: self.pu_power,
            su_report_power: self.su_report_power,
            noise: self.noise,
            kappa: self.kappa,
            mu: self.mu,
            m: self.m,
            lambda,
        }
    }

    pub fn game(&self) -> GameParams {
        GameParams { alpha: self.alpha }
    }

    pub fn pu(&self) -> Position {
        self.pu_position
            .unwrap_or(Position::new(self.area_side / 2.0, self.area_side / 2.0))
    }

    pub fn validate(&self) -> Result<()> {
        self.radio(1.0).validate()?;
        self.game().validate()?;
        let size_ok = |n: usize| (1..=MAX_SUS).contains(&n);
        if !size_ok(self.n_sus) {
            return Err(Error::config("n_sus", format!("must lie in 1..={MAX_SUS}, got {}", self.n_sus)));
        }
        if self.n_list.is_empty() || !self.n_list.iter().copied().all(size_ok) {
            return Err(Error::config("n_list", format!("needs sizes in 1..={MAX_SUS}")));
        }
        if !(self.area_side.is_finite() && self.area_side > 0.0) {
            return Err(Error::config("area_side", "must be finite and > 0"));
        }
        if self.pu_position.is_some_and(|p| !p.is_finite()) {
            return Err(Error::config("pu_position", "must be finite"));
        }
        if let Some(sus) = &self.su_positions {
            if sus.len() != self.n_sus {
                return Err(Error::config(
                    "su_positions",
                    format!("has {} entries but n_sus is {}", sus.len(), self.n_sus),
                ));
            }
            if sus.iter().any(|p| !p.is_finite()) {
                return Err(Error::config("su_positions", "must be finite"));
            }
        }
        if self.drops == 0 {
            return Err(Error::config("drops", "must be >= 1"));
        }
        if self.pf_grid.is_empty() {
            return Err(Error::config("pf_grid", "must not be empty"));
        }
        if let Some(pf) = self.pf_grid.iter().find(|&&pf| !(pf > 0.0 && pf < self.alpha)) {
            return Err(Error::config(
                "pf_grid",
                format!("{pf} is outside (0, alpha = {})", self.alpha),
            ));
        }
        if self.centralized_cap == 0 || self.centralized_cap > EXTENDED_LIMIT {
            return Err(Error::config(
                "centralized_cap",
                format!("must lie in 1..={EXTENDED_LIMIT}, got {}", self.centralized_cap),
            ));
        }
        if self.threads == Some(0) {
            return Err(Error::config("threads", "must be >= 1"));
        }
        Ok(())
    }
}
