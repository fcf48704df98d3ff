use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::model::{CountryId, StateSpaceModel, StateVar, WorldState};

/// Instrument values carried into date 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InstrumentLags {
    pub g: [f64; 2],
    /// Lag of the rate instrument that sets each country's nominal rate.
    pub i_nom: [f64; 2],
}

/// Positions of the spending and rate instruments of each country.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct InstrumentSlots {
    pub g: [Option<usize>; 2],
    pub i_nom: [Option<usize>; 2],
}

impl InstrumentSlots {
    pub fn of(model: &StateSpaceModel) -> Self {
        use crate::model::InstrumentId;
        Self {
            g: CountryId::BOTH.map(|c| model.instrument_index(InstrumentId::Spending(c))),
            i_nom: CountryId::BOTH.map(|c| model.instrument_index(model.rate_instrument(c))),
        }
    }
}

/// A simulated path in deviations from baseline.
///
/// Country arrays are ordered home, foreign.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub horizon: usize,
    /// Full state vector (predetermined then jump) per date.
    pub states: Vec<DVector<f64>>,
    pub instruments: Vec<DVector<f64>>,
    pub statics: Vec<DVector<f64>>,
    /// State after the last date.
    pub terminal: DVector<f64>,
    pub worlds: Vec<WorldState>,
    pub debt_targets: Vec<[f64; 2]>,
    pub initial_lags: InstrumentLags,
    pub slots: InstrumentSlots,
}

impl Trajectory {
    pub fn from_path(
        model: &StateSpaceModel,
        states: Vec<DVector<f64>>,
        instruments: Vec<DVector<f64>>,
        terminal: DVector<f64>,
    ) -> Self {
        let statics: Vec<_> = states
            .iter()
            .zip(&instruments)
            .map(|(z, u)| model.statics_at(z, u))
            .collect();
        let worlds = states
            .iter()
            .zip(&instruments)
            .zip(&statics)
            .map(|((z, u), v)| world_from(model, z, u, v))
            .collect();
        let debt_targets = states.iter().map(|z| debt_targets(model, z)).collect();
        let initial_lags = states.first().map(|z| lags_from(model, z)).unwrap_or_default();
        Self {
            horizon: states.len(),
            states,
            instruments,
            statics,
            terminal,
            worlds,
            debt_targets,
            initial_lags,
            slots: InstrumentSlots::of(model),
        }
    }

    /// Instrument values at date `t` and at `t - 1`, per country.
    pub fn instrument_pair(&self, t: usize) -> (InstrumentLags, InstrumentLags) {
        let pick = |u: &DVector<f64>| InstrumentLags {
            g: self.slots.g.map(|k| k.map(|k| u[k]).unwrap_or(0.0)),
            i_nom: self.slots.i_nom.map(|k| k.map(|k| u[k]).unwrap_or(0.0)),
        };
        let now = pick(&self.instruments[t]);
        let before = if t == 0 { self.initial_lags } else { pick(&self.instruments[t - 1]) };
        (now, before)
    }

    /// Series of one world field over the path.
    pub fn series(&self, f: impl Fn(&WorldState) -> f64) -> Vec<f64> {
        self.worlds.iter().map(f).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.states
            .iter()
            .chain(&self.instruments)
            .chain(&self.statics)
            .flat_map(|v| v.iter())
            .fold(0.0_f64, |m, v| if v.is_finite() { m.max(v.abs()) } else { f64::INFINITY })
    }

    /// The same path seen from `date` onwards.
    pub fn tail(&self, date: usize) -> Trajectory {
        let date = date.min(self.horizon);
        let mut t = Trajectory {
            horizon: self.horizon - date,
            states: self.states[date..].to_vec(),
            instruments: self.instruments[date..].to_vec(),
            statics: self.statics[date..].to_vec(),
            terminal: self.terminal.clone(),
            worlds: self.worlds[date..].to_vec(),
            debt_targets: self.debt_targets[date..].to_vec(),
            initial_lags: self.initial_lags,
            slots: self.slots,
        };
        if date > 0 {
            t.initial_lags = self.instrument_pair(date - 1).0;
        }
        t
    }
}

fn world_from(model: &StateSpaceModel, z: &DVector<f64>, u: &DVector<f64>, v: &DVector<f64>) -> WorldState {
    let mut w = WorldState::default();
    let stat = |sv| model.static_index(sv).map(|k| v[k]).unwrap_or(0.0);
    let st = |sv| model.state_index(sv).map(|k| z[k]).unwrap_or(0.0);
    use crate::model::{InstrumentId, StaticVar};
    for c in CountryId::BOTH {
        let s = model.slot(c);
        let g = model.instrument_index(InstrumentId::Spending(c)).map(|k| u[k]).unwrap_or(0.0);
        let cs = w.country_mut(c);
        cs.y = stat(StaticVar::Output(s));
        cs.r_real = stat(StaticVar::RealRate(s));
        cs.i_nom = stat(StaticVar::NomRate(s));
        cs.tau = stat(StaticVar::Tax(s));
        cs.pi = st(StateVar::Inflation(s));
        let half = if s == 0 { -0.5 } else { 0.5 };
        cs.p = st(StateVar::PriceMean) + half * st(StateVar::RelativePrice);
        cs.b = st(StateVar::Debt(s));
        cs.f = st(StateVar::Nfa(s));
        cs.w = cs.b + cs.f;
        cs.g = g;
    }
    let e = if model.state_index(StateVar::Exchange).is_some() {
        st(StateVar::Exchange)
    } else {
        stat(StaticVar::Exchange)
    };
    w.e = model.orientation() * e;
    w.z = model.orientation() * stat(StaticVar::RealExchange);
    w
}

fn debt_targets(model: &StateSpaceModel, z: &DVector<f64>) -> [f64; 2] {
    CountryId::BOTH.map(|c| {
        model
            .state_index(StateVar::DebtTarget(model.slot(c)))
            .map(|k| z[k])
            .unwrap_or(0.0)
    })
}

fn lags_from(model: &StateSpaceModel, z: &DVector<f64>) -> InstrumentLags {
    use crate::model::InstrumentId;
    let lag = |id| {
        model
            .instrument_index(id)
            .and_then(|k| model.state_index(StateVar::InstrumentLag(k)))
            .map(|k| z[k])
            .unwrap_or(0.0)
    };
    InstrumentLags {
        g: CountryId::BOTH.map(|c| lag(InstrumentId::Spending(c))),
        i_nom: CountryId::BOTH.map(|c| lag(model.rate_instrument(c))),
    }
}
