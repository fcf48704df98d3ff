//! Linear state-space assembly.
//!
//! Variables are deviations from the baseline. Countries are stored in slot
//! order: slot 0 is the lead country chosen at assembly, slot 1 the other.
//! The exchange rate is oriented as slot-0 currency per slot-1 currency and
//! flipped back when observed by country.

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use super::calibration::Calibration;
use super::types::{BehaviorSpec, Consumer, CountryId, Expectations, RegimeSpec};
use crate::error::ModelError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstrumentId {
    Spending(CountryId),
    NominalRate(CountryId),
    UnionRate,
    DominantRate,
}

impl InstrumentId {
    pub fn label(&self) -> String {
        match self {
            InstrumentId::Spending(c) => format!("g_{}", c.label()),
            InstrumentId::NominalRate(c) => format!("i_{}", c.label()),
            InstrumentId::UnionRate => "i_union".into(),
            InstrumentId::DominantRate => "i_dominant".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateVar {
    Debt(usize),
    Nfa(usize),
    /// Average of the two log price levels.
    PriceMean,
    /// Slot-1 minus slot-0 log price level.
    RelativePrice,
    Inflation(usize),
    RealRateLag(usize),
    DebtTarget(usize),
    /// Previous-period value of instrument `k` (model instrument order).
    InstrumentLag(usize),
    ExchangeLag,
    /// Demand impulse due `lag` periods ahead in slot `s`.
    DemandPipe(usize, usize),
    InflationPipe(usize, usize),
    /// Forward-looking exchange rate.
    Exchange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StaticVar {
    Output(usize),
    RealRate(usize),
    Income(usize),
    Tax(usize),
    NomRate(usize),
    RealExchange,
    /// Trade balance of slot 0.
    TradeBalance,
    /// Exchange rate when expectations are backward.
    Exchange,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    State(usize),
    Static(usize),
    Inst(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EquationKind {
    /// `sum(terms) = 0` within the period.
    Static,
    /// `state[k]` next period equals `sum(terms)`.
    Transition(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Equation {
    pub label: String,
    pub kind: EquationKind,
    pub terms: Vec<(Var, f64)>,
}

/// Lengths of the exogenous impulse pipelines carried as states.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Drivers {
    pub demand_periods: usize,
    pub inflation_periods: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Observable {
    Output(CountryId),
    Inflation(CountryId),
    PriceLevel(CountryId),
    RealRate(CountryId),
    NominalRate(CountryId),
    Debt(CountryId),
    Nfa(CountryId),
    Wealth(CountryId),
    Spending(CountryId),
    Tax(CountryId),
    Income(CountryId),
    DebtTarget(CountryId),
    TradeBalance(CountryId),
    Exchange,
    RealExchange,
    Instrument(InstrumentId),
    InstrumentLag(InstrumentId),
}

#[derive(Debug, Clone)]
pub struct StateSpaceModel {
    pub calib: Calibration,
    pub regime: RegimeSpec,
    pub behavior: BehaviorSpec,
    pub drivers: Drivers,
    pub lead: CountryId,
    /// Predetermined states followed by jump variables.
    pub states: Vec<StateVar>,
    pub statics: Vec<StaticVar>,
    pub instruments: Vec<InstrumentId>,
    pub n_pre: usize,
    pub n_jump: usize,
    /// Next-period states from current states.
    pub transition: DMatrix<f64>,
    /// Next-period states from current instruments.
    pub input: DMatrix<f64>,
    pub static_from_state: DMatrix<f64>,
    pub static_from_input: DMatrix<f64>,
    pub equations: Vec<Equation>,
}

impl StateSpaceModel {
    pub fn n_state(&self) -> usize {
        self.n_pre + self.n_jump
    }

    pub fn n_inst(&self) -> usize {
        self.instruments.len()
    }

    pub fn slot(&self, c: CountryId) -> usize {
        if c == self.lead {
            0
        } else {
            1
        }
    }

    pub fn country_of(&self, slot: usize) -> CountryId {
        if slot == 0 {
            self.lead
        } else {
            self.lead.other()
        }
    }

    /// +1 when internal e and z point the same way as the reported ones.
    pub fn orientation(&self) -> f64 {
        if self.lead == CountryId::Home {
            1.0
        } else {
            -1.0
        }
    }

    pub fn state_index(&self, v: StateVar) -> Option<usize> {
        self.states.iter().position(|s| *s == v)
    }

    pub fn static_index(&self, v: StaticVar) -> Option<usize> {
        self.statics.iter().position(|s| *s == v)
    }

    pub fn instrument_index(&self, id: InstrumentId) -> Option<usize> {
        self.instruments.iter().position(|s| *s == id)
    }

    /// Instrument whose lag enters variation costs for a country's nominal rate.
    pub fn rate_instrument(&self, c: CountryId) -> InstrumentId {
        match self.regime {
            RegimeSpec::Flexible => InstrumentId::NominalRate(c),
            RegimeSpec::Emu => InstrumentId::UnionRate,
            RegimeSpec::SingleMarket { .. } => InstrumentId::DominantRate,
        }
    }

    fn unit_state(&self, k: usize) -> (RowDVector<f64>, RowDVector<f64>) {
        let mut z = RowDVector::zeros(self.n_state());
        z[k] = 1.0;
        (z, RowDVector::zeros(self.n_inst()))
    }

    fn static_row(&self, v: StaticVar) -> (RowDVector<f64>, RowDVector<f64>) {
        let k = self.static_index(v).expect("static variable present");
        (
            self.static_from_state.row(k).into_owned(),
            self.static_from_input.row(k).into_owned(),
        )
    }

    /// Linear map from (states, instruments) to an observable.
    pub fn observable_row(&self, obs: Observable) -> Option<(RowDVector<f64>, RowDVector<f64>)> {
        let zero = || (RowDVector::zeros(self.n_state()), RowDVector::zeros(self.n_inst()));
        let st = |v: StateVar| self.state_index(v).map(|k| self.unit_state(k));
        let scale = |(a, b): (RowDVector<f64>, RowDVector<f64>), s: f64| (a * s, b * s);
        Some(match obs {
            Observable::Output(c) => self.static_row(StaticVar::Output(self.slot(c))),
            Observable::RealRate(c) => self.static_row(StaticVar::RealRate(self.slot(c))),
            Observable::NominalRate(c) => self.static_row(StaticVar::NomRate(self.slot(c))),
            Observable::Tax(c) => self.static_row(StaticVar::Tax(self.slot(c))),
            Observable::Income(c) => self.static_row(StaticVar::Income(self.slot(c))),
            Observable::Inflation(c) => st(StateVar::Inflation(self.slot(c)))?,
            Observable::PriceLevel(c) => {
                let (mean, u) = st(StateVar::PriceMean)?;
                let (rel, _) = st(StateVar::RelativePrice)?;
                let half = if self.slot(c) == 0 { -0.5 } else { 0.5 };
                (mean + rel * half, u)
            }
            Observable::Debt(c) => st(StateVar::Debt(self.slot(c)))?,
            Observable::Nfa(c) => st(StateVar::Nfa(self.slot(c)))?,
            Observable::DebtTarget(c) => st(StateVar::DebtTarget(self.slot(c)))?,
            Observable::Wealth(c) => {
                let (b, _) = st(StateVar::Debt(self.slot(c)))?;
                let (f, u) = st(StateVar::Nfa(self.slot(c)))?;
                (b + f, u)
            }
            Observable::Spending(c) => {
                let k = self.instrument_index(InstrumentId::Spending(c))?;
                let (z, mut u) = zero();
                u[k] = 1.0;
                (z, u)
            }
            Observable::TradeBalance(c) => {
                let s = if self.slot(c) == 0 { 1.0 } else { -1.0 };
                scale(self.static_row(StaticVar::TradeBalance), s)
            }
            Observable::Exchange => {
                let row = if let Some(k) = self.state_index(StateVar::Exchange) {
                    self.unit_state(k)
                } else if self.static_index(StaticVar::Exchange).is_some() {
                    self.static_row(StaticVar::Exchange)
                } else {
                    zero()
                };
                scale(row, self.orientation())
            }
            Observable::RealExchange => scale(self.static_row(StaticVar::RealExchange), self.orientation()),
            Observable::Instrument(id) => {
                let k = self.instrument_index(id)?;
                let (z, mut u) = zero();
                u[k] = 1.0;
                (z, u)
            }
            Observable::InstrumentLag(id) => {
                let k = self.instrument_index(id)?;
                st(StateVar::InstrumentLag(k))?
            }
        })
    }

    /// Static variables implied by states and instruments.
    pub fn statics_at(&self, z: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.static_from_state * z + &self.static_from_input * u
    }

    pub fn step(&self, z: &DVector<f64>, u: &DVector<f64>) -> DVector<f64> {
        &self.transition * z + &self.input * u
    }
}

struct Builder {
    states: Vec<StateVar>,
    statics: Vec<StaticVar>,
    instruments: Vec<InstrumentId>,
    equations: Vec<Equation>,
}

impl Builder {
    fn s(&self, v: StateVar) -> Var {
        Var::State(self.states.iter().position(|x| *x == v).expect("state"))
    }
    fn v(&self, v: StaticVar) -> Var {
        Var::Static(self.statics.iter().position(|x| *x == v).expect("static"))
    }
    fn u(&self, id: InstrumentId) -> Var {
        Var::Inst(self.instruments.iter().position(|x| *x == id).expect("instrument"))
    }
    fn has(&self, v: StateVar) -> bool {
        self.states.contains(&v)
    }
    fn static_eq(&mut self, label: &str, terms: Vec<(Var, f64)>) {
        self.equations.push(Equation { label: label.to_string(), kind: EquationKind::Static, terms });
    }
    fn transition(&mut self, label: &str, target: StateVar, terms: Vec<(Var, f64)>) {
        let k = self.states.iter().position(|x| *x == target).expect("target state");
        self.equations.push(Equation {
            label: label.to_string(),
            kind: EquationKind::Transition(k),
            terms,
        });
    }
}

/// Assembles the model with no impulse pipelines and Home as lead.
pub fn assemble_linear_system(
    calib: &Calibration,
    regime: RegimeSpec,
    behavior: BehaviorSpec,
) -> Result<StateSpaceModel, ModelError> {
    assemble_with(calib, regime, behavior, Drivers::default(), CountryId::Home)
}

pub fn assemble_with(
    calib: &Calibration,
    regime: RegimeSpec,
    behavior: BehaviorSpec,
    drivers: Drivers,
    lead: CountryId,
) -> Result<StateSpaceModel, ModelError> {
    calib.validate()?;
    if let super::types::Indexation::Partial(theta) = behavior.indexation {
        if !(0.0..=1.0).contains(&theta) {
            return Err(ModelError::InvalidCalibration(
                "partial indexation violates 0 <= theta <= 1".into(),
            ));
        }
    }
    let rational = behavior.expectations == Expectations::Rational;
    let theta = behavior.indexation_degree(calib.theta_idx);
    let country = |slot: usize| if slot == 0 { lead } else { lead.other() };

    let mut instruments = vec![
        InstrumentId::Spending(country(0)),
        InstrumentId::Spending(country(1)),
    ];
    match regime {
        RegimeSpec::Flexible => {
            instruments.push(InstrumentId::NominalRate(country(0)));
            instruments.push(InstrumentId::NominalRate(country(1)));
        }
        RegimeSpec::Emu => instruments.push(InstrumentId::UnionRate),
        RegimeSpec::SingleMarket { .. } => instruments.push(InstrumentId::DominantRate),
    }

    let mut states = Vec::new();
    for s in 0..2 {
        states.extend([
            StateVar::Debt(s),
            StateVar::Nfa(s),
            StateVar::Inflation(s),
            StateVar::RealRateLag(s),
            StateVar::DebtTarget(s),
        ]);
    }
    states.push(StateVar::RelativePrice);
    states.push(StateVar::PriceMean);
    states.extend((0..instruments.len()).map(StateVar::InstrumentLag));
    let flexible = regime == RegimeSpec::Flexible;
    if flexible && !rational {
        states.push(StateVar::ExchangeLag);
    }
    for s in 0..2 {
        states.extend((0..drivers.demand_periods).map(|l| StateVar::DemandPipe(s, l)));
        states.extend((0..drivers.inflation_periods).map(|l| StateVar::InflationPipe(s, l)));
    }
    let n_pre = states.len();
    if flexible && rational {
        states.push(StateVar::Exchange);
    }
    let n_jump = states.len() - n_pre;

    let mut statics = Vec::new();
    for s in 0..2 {
        statics.extend([
            StaticVar::Output(s),
            StaticVar::RealRate(s),
            StaticVar::Income(s),
            StaticVar::Tax(s),
            StaticVar::NomRate(s),
        ]);
    }
    statics.push(StaticVar::RealExchange);
    statics.push(StaticVar::TradeBalance);
    if flexible && !rational {
        statics.push(StaticVar::Exchange);
    }

    let mut bld = Builder { states, statics, instruments, equations: Vec::new() };
    let phi = calib.phi_risk;
    // Risk premium on half the NFA differential: equals the home position on
    // every path because NFA deviations sum to zero.
    let premium = |b: &Builder, sign: f64| {
        vec![
            (b.s(StateVar::Nfa(0)), sign * phi / 2.0),
            (b.s(StateVar::Nfa(1)), -sign * phi / 2.0),
        ]
    };

    // Nominal rates.
    for s in 0..2 {
        let i = bld.v(StaticVar::NomRate(s));
        let mut terms = vec![(i, 1.0)];
        match regime {
            RegimeSpec::Flexible => terms.push((bld.u(InstrumentId::NominalRate(country(s))), -1.0)),
            RegimeSpec::Emu => terms.push((bld.u(InstrumentId::UnionRate), -1.0)),
            RegimeSpec::SingleMarket { dominant } => {
                terms.push((bld.u(InstrumentId::DominantRate), -1.0));
                if country(s) != dominant {
                    terms.push((bld.s(StateVar::Nfa(s)), phi));
                }
            }
        }
        bld.static_eq(&format!("nominal_rate[{s}]"), terms);
    }

    // Exchange rates.
    let mut zterms = vec![
        (bld.v(StaticVar::RealExchange), 1.0),
        (bld.s(StateVar::RelativePrice), -1.0),
    ];
    if flexible {
        if rational {
            zterms.push((bld.s(StateVar::Exchange), -1.0));
        } else {
            zterms.push((bld.v(StaticVar::Exchange), -1.0));
            let mut e = vec![
                (bld.v(StaticVar::Exchange), 1.0),
                (bld.s(StateVar::ExchangeLag), -1.0),
                (bld.v(StaticVar::NomRate(0)), 1.0),
                (bld.v(StaticVar::NomRate(1)), -1.0),
            ];
            e.extend(premium(&bld, -1.0));
            bld.static_eq("exchange_rate", e);
        }
    }
    bld.static_eq("real_exchange_rate", zterms);
    let tb = vec![
        (bld.v(StaticVar::TradeBalance), 1.0),
        (bld.v(StaticVar::RealExchange), -calib.nu),
        (bld.v(StaticVar::Output(0)), calib.m),
        (bld.v(StaticVar::Output(1)), -calib.m),
    ];
    bld.static_eq("trade_balance", tb);

    for s in 0..2 {
        let sign = if s == 0 { 1.0 } else { -1.0 };
        let y = bld.v(StaticVar::Output(s));
        let r = bld.v(StaticVar::RealRate(s));
        let q = bld.v(StaticVar::Income(s));
        let tau = bld.v(StaticVar::Tax(s));
        let i = bld.v(StaticVar::NomRate(s));
        let g = bld.u(InstrumentId::Spending(country(s)));
        let b = bld.s(StateVar::Debt(s));
        let f = bld.s(StateVar::Nfa(s));
        let pi = bld.s(StateVar::Inflation(s));

        bld.static_eq(
            &format!("tax_rule[{s}]"),
            vec![(tau, 1.0), (b, -calib.beta_tax), (bld.s(StateVar::DebtTarget(s)), calib.beta_tax)],
        );

        let mut rr = vec![(r, 1.0), (i, -1.0)];
        if rational {
            rr.push((pi, theta));
            rr.push((y, calib.lambda_p));
        } else {
            rr.push((pi, 1.0));
        }
        bld.static_eq(&format!("real_rate[{s}]"), rr);

        // Foreign-interest flows vanish at first order around a zero net position.
        let income = match behavior.consumer {
            Consumer::Keynesian => vec![(q, 1.0), (y, -1.0), (r, -calib.b_bar), (tau, 1.0)],
            Consumer::Ricardian => vec![(q, 1.0), (y, -1.0), (g, 1.0)],
        };
        bld.static_eq(&format!("income[{s}]"), income);

        let mut demand = vec![
            (y, 1.0),
            (q, -calib.c),
            (g, -1.0),
            (r, calib.sigma),
            (b, -calib.kappa),
            (f, -calib.kappa),
            (bld.s(StateVar::RealRateLag(s)), calib.kappa * calib.a),
            (bld.v(StaticVar::TradeBalance), -sign),
        ];
        if drivers.demand_periods > 0 {
            demand.push((bld.s(StateVar::DemandPipe(s, 0)), -1.0));
        }
        bld.static_eq(&format!("demand[{s}]"), demand);
    }

    // Transitions.
    let mut mean = vec![(bld.s(StateVar::PriceMean), 1.0)];
    let mut relative = vec![(bld.s(StateVar::RelativePrice), 1.0)];
    for s in 0..2 {
        let sign = if s == 0 { 1.0 } else { -1.0 };
        let y = bld.v(StaticVar::Output(s));
        let r = bld.v(StaticVar::RealRate(s));
        let tau = bld.v(StaticVar::Tax(s));
        let g = bld.u(InstrumentId::Spending(country(s)));
        let b = bld.s(StateVar::Debt(s));
        let f = bld.s(StateVar::Nfa(s));
        let pi = bld.s(StateVar::Inflation(s));

        bld.transition(
            &format!("debt[{s}]"),
            StateVar::Debt(s),
            vec![(b, 1.0), (r, calib.b_bar), (g, 1.0), (tau, -1.0)],
        );
        bld.transition(
            &format!("nfa[{s}]"),
            StateVar::Nfa(s),
            vec![(f, 1.0), (bld.v(StaticVar::TradeBalance), sign)],
        );
        let mut infl = vec![(pi, theta), (y, calib.lambda_p)];
        if drivers.inflation_periods > 0 {
            infl.push((bld.s(StateVar::InflationPipe(s, 0)), 1.0));
        }
        mean.extend(infl.iter().map(|&(v, c)| (v, 0.5 * c)));
        relative.extend(infl.iter().map(|&(v, c)| (v, -sign * c)));
        bld.transition(&format!("inflation[{s}]"), StateVar::Inflation(s), infl);
        bld.transition(&format!("real_rate_lag[{s}]"), StateVar::RealRateLag(s), vec![(r, 1.0)]);
        let target = bld.s(StateVar::DebtTarget(s));
        bld.transition(&format!("debt_target[{s}]"), StateVar::DebtTarget(s), vec![(target, 1.0)]);
        for (pipe, n) in [
            (StateVar::DemandPipe as fn(usize, usize) -> StateVar, drivers.demand_periods),
            (StateVar::InflationPipe as fn(usize, usize) -> StateVar, drivers.inflation_periods),
        ] {
            for l in 0..n {
                let terms = if l + 1 < n { vec![(bld.s(pipe(s, l + 1)), 1.0)] } else { vec![] };
                bld.transition(&format!("pipeline[{s},{l}]"), pipe(s, l), terms);
            }
        }
    }
    bld.transition("price_mean", StateVar::PriceMean, mean);
    bld.transition("relative_price", StateVar::RelativePrice, relative);
    for k in 0..bld.instruments.len() {
        bld.transition(&format!("instrument_lag[{k}]"), StateVar::InstrumentLag(k), vec![(Var::Inst(k), 1.0)]);
    }
    if bld.has(StateVar::ExchangeLag) {
        let e = bld.v(StaticVar::Exchange);
        bld.transition("exchange_lag", StateVar::ExchangeLag, vec![(e, 1.0)]);
    }
    if bld.has(StateVar::Exchange) {
        let mut e = vec![
            (bld.s(StateVar::Exchange), 1.0),
            (bld.v(StaticVar::NomRate(0)), 1.0),
            (bld.v(StaticVar::NomRate(1)), -1.0),
        ];
        e.extend(premium(&bld, -1.0));
        bld.transition("exchange_rate", StateVar::Exchange, e);
    }

    let (nz, nv, nu) = (bld.states.len(), bld.statics.len(), bld.instruments.len());
    let mut g = DMatrix::<f64>::zeros(nv, nv);
    let mut sz = DMatrix::<f64>::zeros(nv, nz);
    let mut su = DMatrix::<f64>::zeros(nv, nu);
    let mut row = 0;
    let mut tz = DMatrix::<f64>::zeros(nz, nz);
    let mut tv = DMatrix::<f64>::zeros(nz, nv);
    let mut tu = DMatrix::<f64>::zeros(nz, nu);
    for eq in &bld.equations {
        match eq.kind {
            EquationKind::Static => {
                for &(var, coef) in &eq.terms {
                    match var {
                        Var::Static(k) => g[(row, k)] += coef,
                        Var::State(k) => sz[(row, k)] -= coef,
                        Var::Inst(k) => su[(row, k)] -= coef,
                    }
                }
                row += 1;
            }
            EquationKind::Transition(target) => {
                for &(var, coef) in &eq.terms {
                    match var {
                        Var::Static(k) => tv[(target, k)] += coef,
                        Var::State(k) => tz[(target, k)] += coef,
                        Var::Inst(k) => tu[(target, k)] += coef,
                    }
                }
            }
        }
    }
    debug_assert_eq!(row, nv);
    let lu = g.lu();
    let static_from_state = lu.solve(&sz).ok_or(ModelError::SingularStaticBlock)?;
    let static_from_input = lu.solve(&su).ok_or(ModelError::SingularStaticBlock)?;
    if !static_from_state.iter().chain(static_from_input.iter()).all(|v| v.is_finite()) {
        return Err(ModelError::SingularStaticBlock);
    }
    let transition = &tz + &tv * &static_from_state;
    let input = &tu + &tv * &static_from_input;

    Ok(StateSpaceModel {
        calib: *calib,
        regime,
        behavior,
        drivers,
        lead,
        states: bld.states,
        statics: bld.statics,
        instruments: bld.instruments,
        n_pre,
        n_jump,
        transition,
        input,
        static_from_state,
        static_from_input,
        equations: bld.equations,
    })
}
