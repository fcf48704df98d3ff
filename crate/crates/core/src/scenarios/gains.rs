use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::game::{PlayerId, PlayerLoss, PolicyMode};
use crate::model::RegimeSpec;

use super::run::solve_mode;
use super::scenario::{Scenario, Shock};

/// Tolerance for the blocking comparison.
pub const BLOCKING_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainsCell {
    pub mode: PolicyMode,
    pub independence: bool,
    pub losses: Vec<PlayerLoss>,
    pub joint: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelativeGain {
    pub independence: bool,
    /// Player name, or "joint".
    pub name: String,
    pub nash: f64,
    pub cooperative: f64,
    /// (Nash - Cooperative) / Nash, zero when the Nash loss is zero.
    pub gain: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainsTable {
    pub scenario: String,
    pub cells: Vec<GainsCell>,
    pub relative: Vec<RelativeGain>,
}

impl GainsTable {
    pub fn cell(&self, mode: PolicyMode, independence: bool) -> Option<&GainsCell> {
        self.cells.iter().find(|c| c.mode == mode && c.independence == independence)
    }

    pub fn joint_gain(&self, independence: bool) -> Option<f64> {
        self.relative.iter().find(|r| r.independence == independence && r.name == "joint").map(|r| r.gain)
    }
}

pub fn relative_gain(nash: f64, coop: f64) -> f64 {
    if nash == 0.0 {
        0.0
    } else {
        (nash - coop) / nash
    }
}

fn run_cell(s: &Scenario, mode: PolicyMode, independence: bool) -> GainsCell {
    let mut s = s.clone();
    s.independence = independence;
    match solve_mode(&s, mode) {
        Ok((_, _, Some(eq))) => GainsCell { mode, independence, joint: eq.joint_loss, losses: eq.losses, error: None },
        Ok(_) => GainsCell { mode, independence, losses: Vec::new(), joint: f64::NAN, error: Some("no equilibrium".into()) },
        Err(e) => GainsCell { mode, independence, losses: Vec::new(), joint: f64::NAN, error: Some(e.to_string()) },
    }
}

/// Losses under Nash and cooperation, with and without central-bank independence.
pub fn cooperation_gains(s: &Scenario) -> GainsTable {
    let mut modes = vec![PolicyMode::Nash, PolicyMode::Cooperative];
    if s.bargaining.in_gains {
        modes.push(PolicyMode::Bargaining);
    }
    let grid: Vec<(PolicyMode, bool)> =
        [true, false].iter().flat_map(|&ind| modes.iter().map(move |&m| (m, ind))).collect();
    // collect() on an indexed parallel iterator keeps the declared order.
    let cells: Vec<GainsCell> = grid.par_iter().map(|&(m, ind)| run_cell(s, m, ind)).collect();

    let mut relative = Vec::new();
    for ind in [true, false] {
        let find = |m| cells.iter().find(|c| c.mode == m && c.independence == ind);
        let (Some(nash), Some(coop)) = (find(PolicyMode::Nash), find(PolicyMode::Cooperative)) else { continue };
        if nash.error.is_some() || coop.error.is_some() {
            continue;
        }
        for l in &nash.losses {
            if let Some(c) = coop.losses.iter().find(|c| c.name == l.name) {
                relative.push(RelativeGain {
                    independence: ind,
                    name: l.name.clone(),
                    nash: l.loss,
                    cooperative: c.loss,
                    gain: relative_gain(l.loss, c.loss),
                });
            }
        }
        relative.push(RelativeGain {
            independence: ind,
            name: "joint".into(),
            nash: nash.joint,
            cooperative: coop.joint,
            gain: relative_gain(nash.joint, coop.joint),
        });
    }
    GainsTable { scenario: s.name.clone(), cells, relative }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockingReport {
    pub scenario: String,
    pub government: String,
    pub loss_nash: f64,
    pub loss_cooperative: f64,
    /// The dominated government does better without cooperation.
    pub blocking: bool,
}

pub fn is_blocking(loss_nash: f64, loss_coop: f64) -> bool {
    loss_nash < loss_coop - BLOCKING_TOL
}

/// Would the dominated government veto the cooperative plan?
pub fn sm_blocking_probe(s: &Scenario) -> Result<BlockingReport, ScenarioError> {
    let RegimeSpec::SingleMarket { dominant } = s.regime else {
        return Err(ScenarioError::Invalid("blocking probe needs the Single Market regime".into()));
    };
    let dominated = dominant.other();
    if !matches!(s.shock, Shock::DebtTarget { country, .. } if country == dominated) {
        return Err(ScenarioError::Invalid("blocking probe needs a dominated-country debt cut".into()));
    }
    let gov = PlayerId::government(dominated);
    let loss = |mode| -> Result<f64, ScenarioError> {
        let (_, _, eq) = solve_mode(s, mode)?;
        let eq = eq.ok_or_else(|| ScenarioError::Invalid("no equilibrium".into()))?;
        eq.players
            .iter()
            .position(|p| p.spec.id == gov)
            .map(|k| eq.losses[k].loss)
            .ok_or_else(|| ScenarioError::Invalid(format!("{} is not a player", gov.label())))
    };
    let loss_nash = loss(PolicyMode::Nash)?;
    let loss_cooperative = loss(PolicyMode::Cooperative)?;
    Ok(BlockingReport {
        scenario: s.name.clone(),
        government: gov.label().into(),
        loss_nash,
        loss_cooperative,
        blocking: is_blocking(loss_nash, loss_cooperative),
    })
}
