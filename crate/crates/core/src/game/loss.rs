use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::model::{CountryId, InstrumentId, Observable, StateSpaceModel, StateVar};
use crate::solver::Trajectory;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LossWeights {
    pub w_pi: f64,
    pub w_y: f64,
    /// Debt relative to its target.
    pub w_b: f64,
    /// Net foreign assets relative to baseline.
    pub w_f: f64,
    pub w_dg: f64,
    pub w_di: f64,
}

impl Default for LossWeights {
    fn default() -> Self {
        Self::government()
    }
}

impl LossWeights {
    pub fn government() -> Self {
        Self { w_pi: 0.25, w_y: 1.0, w_b: 0.5, w_f: 0.0, w_dg: 0.1, w_di: 0.0 }
    }

    pub fn central_bank() -> Self {
        Self { w_pi: 1.0, w_y: 0.25, w_b: 0.0, w_f: 0.0, w_dg: 0.0, w_di: 0.1 }
    }

    pub fn zero() -> Self {
        Self { w_pi: 0.0, w_y: 0.0, w_b: 0.0, w_f: 0.0, w_dg: 0.0, w_di: 0.0 }
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self {
            w_pi: self.w_pi * k,
            w_y: self.w_y * k,
            w_b: self.w_b * k,
            w_f: self.w_f * k,
            w_dg: self.w_dg * k,
            w_di: self.w_di * k,
        }
    }

    fn all(&self) -> [f64; 6] {
        [self.w_pi, self.w_y, self.w_b, self.w_f, self.w_dg, self.w_di]
    }

    pub fn is_valid(&self) -> bool {
        self.all().iter().all(|w| w.is_finite() && *w >= 0.0)
    }
}

/// Whose variables a loss reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossScope {
    Country(CountryId),
    /// Averages over the two countries.
    Union,
}

/// Discounted quadratic loss. Debt is measured against the debt-target
/// state, foreign assets against baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LossSpec {
    pub scope: LossScope,
    pub weights: LossWeights,
    pub discount: f64,
}

impl LossSpec {
    fn countries(&self) -> Vec<(CountryId, f64)> {
        match self.scope {
            LossScope::Country(c) => vec![(c, 1.0)],
            LossScope::Union => vec![(CountryId::Home, 0.5), (CountryId::Foreign, 0.5)],
        }
    }
}

/// Loss of `spec` along `traj`, read from the recorded world states.
pub fn evaluate_loss(traj: &Trajectory, spec: &LossSpec) -> f64 {
    let w = &spec.weights;
    let mut total = 0.0;
    let mut factor = 1.0;
    for t in 0..traj.horizon {
        let world = &traj.worlds[t];
        let (now, before) = traj.instrument_pair(t);
        let (mut pi, mut y, mut b, mut f, mut dg, mut di) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for (c, share) in spec.countries() {
            let k = c as usize;
            let s = world.country(c);
            pi += share * s.pi;
            y += share * s.y;
            b += share * (s.b - traj.debt_targets[t][k]);
            f += share * s.f;
            dg += share * (now.g[k] - before.g[k]);
            di += share * (now.i_nom[k] - before.i_nom[k]);
        }
        let stage = w.w_pi * pi * pi
            + w.w_y * y * y
            + w.w_b * b * b
            + w.w_f * f * f
            + w.w_dg * dg * dg
            + w.w_di * di * di;
        total += factor * stage;
        factor *= spec.discount;
    }
    total
}

/// Weighted sum of losses sharing one discount factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub terms: Vec<(f64, LossSpec)>,
}

impl From<LossSpec> for Objective {
    fn from(spec: LossSpec) -> Self {
        Self { terms: vec![(1.0, spec)] }
    }
}

impl Objective {
    pub fn discount(&self) -> Option<f64> {
        let d = self.terms.first()?.1.discount;
        self.terms.iter().all(|(_, s)| s.discount == d).then_some(d)
    }

    pub fn evaluate(&self, traj: &Trajectory) -> f64 {
        self.terms.iter().map(|(k, s)| k * evaluate_loss(traj, s)).sum()
    }

    pub fn combine(parts: &[(f64, &Objective)]) -> Objective {
        let mut terms = Vec::new();
        for (k, obj) in parts {
            for (w, s) in &obj.terms {
                terms.push((k * w, *s));
            }
        }
        Objective { terms }
    }
}

/// Quadratic form `sum_k w_k (c_k z + d_k u)^2` of one stage.
#[derive(Debug, Clone)]
pub struct LossRows {
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub w: DVector<f64>,
}

impl LossRows {
    pub fn of(model: &StateSpaceModel, objective: &Objective) -> Self {
        let mut rows: Vec<(RowDVector<f64>, RowDVector<f64>, f64)> = Vec::new();
        for (k, spec) in &objective.terms {
            for (row_z, row_u, w) in spec_rows(model, spec) {
                if w * k != 0.0 {
                    rows.push((row_z, row_u, w * k));
                }
            }
        }
        let (nz, nu) = (model.n_state(), model.n_inst());
        let mut c = DMatrix::zeros(rows.len(), nz);
        let mut d = DMatrix::zeros(rows.len(), nu);
        let mut w = DVector::zeros(rows.len());
        for (i, (rz, ru, wi)) in rows.into_iter().enumerate() {
            c.set_row(i, &rz);
            d.set_row(i, &ru);
            w[i] = wi;
        }
        Self { c, d, w }
    }

    pub fn stage(&self, z: &DVector<f64>, u: &DVector<f64>) -> f64 {
        let e = &self.c * z + &self.d * u;
        e.iter().zip(self.w.iter()).map(|(e, w)| w * e * e).sum()
    }
}

fn spec_rows(model: &StateSpaceModel, spec: &LossSpec) -> Vec<(RowDVector<f64>, RowDVector<f64>, f64)> {
    let (nz, nu) = (model.n_state(), model.n_inst());
    let zero = || (RowDVector::zeros(nz), RowDVector::zeros(nu));
    let obs = |o: Observable| model.observable_row(o).unwrap_or_else(zero);
    let diff = |id: InstrumentId| -> (RowDVector<f64>, RowDVector<f64>) {
        match (model.observable_row(Observable::Instrument(id)), model.observable_row(Observable::InstrumentLag(id))) {
            (Some((_, u)), Some((z, _))) => (-z, u),
            _ => zero(),
        }
    };
    let w = &spec.weights;
    let mut acc: [(RowDVector<f64>, RowDVector<f64>); 6] = std::array::from_fn(|_| zero());
    for (c, share) in spec.countries() {
        let debt = {
            let (bz, bu) = obs(Observable::Debt(c));
            let k = model.state_index(StateVar::DebtTarget(model.slot(c)));
            let mut bz = bz;
            if let Some(k) = k {
                bz[k] -= 1.0;
            }
            (bz, bu)
        };
        let parts = [
            obs(Observable::Inflation(c)),
            obs(Observable::Output(c)),
            debt,
            obs(Observable::Nfa(c)),
            diff(InstrumentId::Spending(c)),
            diff(model.rate_instrument(c)),
        ];
        for (a, (pz, pu)) in acc.iter_mut().zip(parts) {
            a.0 += pz * share;
            a.1 += pu * share;
        }
    }
    acc.into_iter()
        .zip(w.all())
        .map(|((z, u), w)| (z, u, w))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{assemble_linear_system, BehaviorSpec, Calibration, RegimeSpec};
    use crate::solver::{simulate_backward, AnticipatedPath, PolicyRule};

    fn emu() -> StateSpaceModel {
        assemble_linear_system(&Calibration::default(), RegimeSpec::Emu, BehaviorSpec::default()).unwrap()
    }

    #[test]
    fn zero_path_has_zero_loss() {
        let m = emu();
        let traj = simulate_backward(&m, &PolicyRule::passive(&m), &DVector::zeros(m.n_pre), &AnticipatedPath::zero(m.n_inst()), 10).unwrap();
        let spec = LossSpec { scope: LossScope::Country(CountryId::Home), weights: LossWeights::government(), discount: 0.96 };
        assert_eq!(evaluate_loss(&traj, &spec), 0.0);
    }

    #[test]
    fn single_inflation_period() {
        let m = emu();
        let mut s0 = DVector::zeros(m.n_pre);
        s0[m.state_index(StateVar::Inflation(0)).unwrap()] = 0.01;
        let traj = simulate_backward(&m, &PolicyRule::passive(&m), &s0, &AnticipatedPath::zero(m.n_inst()), 1).unwrap();
        let w = LossWeights { w_pi: 1.0, ..LossWeights::zero() };
        let spec = LossSpec { scope: LossScope::Country(CountryId::Home), weights: w, discount: 0.5 };
        assert!((evaluate_loss(&traj, &spec) - 1e-4).abs() < 1e-18);
    }

    #[test]
    fn rows_agree_with_recorded_path() {
        let m = emu();
        let mut s0 = DVector::zeros(m.n_pre);
        s0[m.state_index(StateVar::DebtTarget(0)).unwrap()] = -0.03;
        s0[m.state_index(StateVar::Inflation(1)).unwrap()] = 0.004;
        let mut rule = PolicyRule::passive(&m);
        rule.gain[(0, 0)] = 0.3;
        rule.gain[(2, 3)] = -0.2;
        let traj = simulate_backward(&m, &rule, &s0, &AnticipatedPath::zero(m.n_inst()), 12).unwrap();
        for scope in [LossScope::Country(CountryId::Home), LossScope::Country(CountryId::Foreign), LossScope::Union] {
            for weights in [LossWeights::government(), LossWeights::central_bank(), LossWeights { w_f: 0.7, ..LossWeights::zero() }] {
                let spec = LossSpec { scope, weights, discount: 0.9 };
                let rows = LossRows::of(&m, &spec.into());
                let mut by_rows = 0.0;
                for t in 0..traj.horizon {
                    by_rows += 0.9_f64.powi(t as i32) * rows.stage(&traj.states[t], &traj.instruments[t]);
                }
                let direct = evaluate_loss(&traj, &spec);
                assert!((by_rows - direct).abs() <= 1e-12 * direct.max(1e-12), "{scope:?} {by_rows} {direct}");
            }
        }
    }
}
