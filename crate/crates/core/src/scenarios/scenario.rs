use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::ScenarioError;
use crate::game::{GameOptions, LossDefaults, PlayerId, PolicyMode};
use crate::model::{
    BehaviorSpec, Calibration, CountryId, Drivers, RegimeSpec, StateSpaceModel, StateVar,
};
use crate::solver::UNIT_CIRCLE_TOL;

pub const DEMAND_SHOCK_SIZE: f64 = 0.01;
pub const DEMAND_SHOCK_PERIODS: usize = 4;
pub const INFLATION_SHOCK_SIZE: f64 = 0.01;
pub const INFLATION_SHOCK_PERIODS: usize = 1;
pub const DEFAULT_HORIZON: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shock {
    Baseline,
    /// Permanent cut of the debt target by `delta` from date 0.
    DebtTarget { country: CountryId, delta: f64 },
    /// Extra demand of `size` for `duration` periods.
    Demand { country: CountryId, size: f64, duration: usize },
    /// Extra inflation of `size` for `duration` periods.
    Inflation { country: CountryId, size: f64, duration: usize },
}

impl Shock {
    pub fn country(&self) -> Option<CountryId> {
        match *self {
            Shock::Baseline => None,
            Shock::DebtTarget { country, .. } | Shock::Demand { country, .. } | Shock::Inflation { country, .. } => {
                Some(country)
            }
        }
    }

    pub fn drivers(&self) -> Drivers {
        match *self {
            Shock::Demand { duration, .. } => Drivers { demand_periods: duration, inflation_periods: 0 },
            Shock::Inflation { duration, .. } => Drivers {
                demand_periods: 0,
                inflation_periods: duration.saturating_sub(1),
            },
            _ => Drivers::default(),
        }
    }

    /// Predetermined states at date 0.
    pub fn initial_state(&self, model: &StateSpaceModel) -> DVector<f64> {
        let mut s = DVector::zeros(model.n_pre);
        let mut set = |v: StateVar, x: f64| {
            if let Some(k) = model.state_index(v) {
                s[k] += x;
            }
        };
        match *self {
            Shock::Baseline => {}
            Shock::DebtTarget { country, delta } => set(StateVar::DebtTarget(model.slot(country)), -delta),
            Shock::Demand { country, size, duration } => {
                for l in 0..duration {
                    set(StateVar::DemandPipe(model.slot(country), l), size);
                }
            }
            Shock::Inflation { country, size, duration } => {
                let slot = model.slot(country);
                if duration > 0 {
                    set(StateVar::Inflation(slot), size);
                    // Date-0 inflation is already in the price level.
                    set(StateVar::PriceMean, 0.5 * size);
                    set(StateVar::RelativePrice, if slot == 0 { -size } else { size });
                }
                for l in 0..duration.saturating_sub(1) {
                    set(StateVar::InflationPipe(slot, l), size);
                }
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BargainingSides {
    /// Home bloc against foreign bloc.
    External,
    /// Government against central bank.
    Internal { country: CountryId },
    Custom { first: Vec<PlayerId>, second: Vec<PlayerId> },
}

impl BargainingSides {
    pub fn members(&self, regime: RegimeSpec) -> [Vec<PlayerId>; 2] {
        use PlayerId::*;
        match self {
            BargainingSides::External => [vec![GovHome, CbHome], vec![GovForeign, CbForeign]],
            BargainingSides::Internal { country } => {
                let bank = match regime {
                    RegimeSpec::Emu => CbUnion,
                    _ => PlayerId::central_bank(*country),
                };
                [vec![PlayerId::government(*country)], vec![bank]]
            }
            BargainingSides::Custom { first, second } => [first.clone(), second.clone()],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BargainingSpec {
    pub sides: BargainingSides,
    pub resolution: usize,
    /// Include a bargaining row in cooperation-gain tables.
    pub in_gains: bool,
}

impl Default for BargainingSpec {
    fn default() -> Self {
        Self { sides: BargainingSides::External, resolution: 21, in_gains: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub shock: Shock,
    pub regime: RegimeSpec,
    pub behavior: BehaviorSpec,
    pub policy_mode: PolicyMode,
    /// Central banks decide separately from governments.
    pub independence: bool,
    pub horizon: usize,
    pub calibration: Calibration,
    pub losses: LossDefaults,
    /// Players whose instruments stay at baseline.
    pub passive_players: Vec<PlayerId>,
    /// Defaults to the dominant central bank.
    pub stackelberg_leader: Option<PlayerId>,
    pub bargaining: BargainingSpec,
    pub solver: SolverSettings,
}

/// Tolerances handed to the equilibrium and saddle-path solvers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSettings {
    pub game_tolerance: f64,
    pub max_iterations: usize,
    pub unit_circle_tol: f64,
}

impl Default for SolverSettings {
    fn default() -> Self {
        let g = GameOptions::default();
        Self { game_tolerance: g.tolerance, max_iterations: g.max_iterations, unit_circle_tol: UNIT_CIRCLE_TOL }
    }
}

impl Scenario {
    pub fn new(name: impl Into<String>, shock: Shock, regime: RegimeSpec, behavior: BehaviorSpec, policy_mode: PolicyMode) -> Self {
        Self {
            name: name.into(),
            shock,
            regime,
            behavior,
            policy_mode,
            independence: true,
            horizon: DEFAULT_HORIZON,
            calibration: Calibration::default(),
            losses: LossDefaults::default(),
            passive_players: Vec::new(),
            stackelberg_leader: None,
            bargaining: BargainingSpec::default(),
            solver: SolverSettings::default(),
        }
    }

    /// Country placed in the first model slot.
    pub fn lead(&self) -> CountryId {
        self.shock.country().unwrap_or(CountryId::Home)
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let bad = |m: String| Err(ScenarioError::Invalid(format!("{}: {m}", self.name)));
        self.calibration.validate()?;
        if self.horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.policy_mode == PolicyMode::Stackelberg && !matches!(self.regime, RegimeSpec::SingleMarket { .. }) {
            return bad("Stackelberg play requires the Single Market regime".into());
        }
        match self.shock {
            Shock::DebtTarget { delta, .. } => {
                if !delta.is_finite() || delta.abs() >= self.calibration.b_bar {
                    return bad(format!("debt-target cut {delta} violates |delta| < b_bar"));
                }
            }
            Shock::Demand { size, duration, .. } | Shock::Inflation { size, duration, .. } => {
                if !size.is_finite() || duration == 0 {
                    return bad("shock needs a finite size and a positive duration".into());
                }
            }
            Shock::Baseline => {}
        }
        let st = &self.solver;
        if !(st.game_tolerance > 0.0 && st.unit_circle_tol >= 0.0 && st.max_iterations > 0) {
            return bad("solver tolerances must be positive".into());
        }
        if self.bargaining.resolution < 2 {
            return bad("bargaining resolution must be at least 2".into());
        }
        Ok(())
    }
}

pub fn debt_target_scenario(country: CountryId, delta: f64, regime: RegimeSpec, behavior: BehaviorSpec, policy_mode: PolicyMode) -> Scenario {
    let name = format!("debt_target_{}_{}_{:?}", country.label(), regime.label(), policy_mode).to_lowercase();
    Scenario::new(name, Shock::DebtTarget { country, delta }, regime, behavior, policy_mode)
}

pub fn demand_shock_scenario(country: CountryId, regime: RegimeSpec, behavior: BehaviorSpec, policy_mode: PolicyMode) -> Scenario {
    let name = format!("demand_{}_{}_{:?}", country.label(), regime.label(), policy_mode).to_lowercase();
    let shock = Shock::Demand { country, size: DEMAND_SHOCK_SIZE, duration: DEMAND_SHOCK_PERIODS };
    Scenario::new(name, shock, regime, behavior, policy_mode)
}

pub fn inflation_shock_scenario(country: CountryId, regime: RegimeSpec, behavior: BehaviorSpec, policy_mode: PolicyMode) -> Scenario {
    let name = format!("inflation_{}_{}_{:?}", country.label(), regime.label(), policy_mode).to_lowercase();
    let shock = Shock::Inflation { country, size: INFLATION_SHOCK_SIZE, duration: INFLATION_SHOCK_PERIODS };
    Scenario::new(name, shock, regime, behavior, policy_mode)
}
