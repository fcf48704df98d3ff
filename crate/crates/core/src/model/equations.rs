//! Behavioural equations and accounting identities, written in levels.
//!
//! The linear state-space system in [`super::system`] is the first-order
//! expansion of these functions around the baseline; the consistency tests
//! check the two against each other.

use super::calibration::Calibration;
use super::types::{BehaviorSpec, Consumer, CountryId, CountryState, RegimeSpec, WorldState};
use crate::error::ModelError;

/// Wealth households want to hold at real rate `r_real`.
pub fn desired_wealth(r_real: f64, calib: &Calibration) -> f64 {
    calib.w0 + calib.a * r_real
}

/// Disposable income. Stocks in `state` are those carried into the period.
pub fn disposable_income(
    state: &CountryState,
    partner: &CountryState,
    _calib: &Calibration,
    behavior: &BehaviorSpec,
) -> f64 {
    let foreign_interest = partner.r_real * state.f;
    match behavior.consumer {
        Consumer::Keynesian => state.y + state.r_real * state.b - state.tau + foreign_interest,
        Consumer::Ricardian => state.y - state.g + foreign_interest,
    }
}

/// Trade balance of `country`; the partner's is its negative.
pub fn trade_balance(world: &WorldState, calib: &Calibration, country: CountryId) -> f64 {
    let home = calib.nu * world.z - calib.m * world.home.y + calib.m * world.foreign.y;
    match country {
        CountryId::Home => home,
        CountryId::Foreign => -home,
    }
}

/// Demand for the output of `country`.
///
/// `lags` holds the previous period; the wealth gap compares the wealth
/// carried into the period with the wealth desired at last period's rate.
pub fn aggregate_demand(
    world: &WorldState,
    lags: &WorldState,
    calib: &Calibration,
    behavior: &BehaviorSpec,
    country: CountryId,
) -> f64 {
    let own = world.country(country);
    let partner = world.country(country.other());
    let income = disposable_income(own, partner, calib, behavior);
    let gap = own.w - desired_wealth(lags.country(country).r_real, calib);
    calib.c * income + own.g - calib.sigma * own.r_real
        + calib.kappa * gap
        + trade_balance(world, calib, country)
}

pub fn price_update(
    pi_lag: f64,
    pi_expected: f64,
    y: f64,
    calib: &Calibration,
    behavior: &BehaviorSpec,
) -> f64 {
    let theta = behavior.indexation_degree(calib.theta_idx);
    theta * pi_lag + (1.0 - theta) * pi_expected + calib.lambda_p * y
}

/// Residual of the interest-parity condition; zero on any admissible path.
pub fn parity_condition(
    world: &WorldState,
    regime: &RegimeSpec,
    expected_depreciation: f64,
    calib: &Calibration,
) -> f64 {
    let f_bar = calib.baseline_nfa();
    match regime {
        RegimeSpec::Flexible => {
            world.home.i_nom
                - world.foreign.i_nom
                - expected_depreciation
                - calib.phi_risk * (world.home.f - f_bar)
        }
        RegimeSpec::Emu => world.home.i_nom - world.foreign.i_nom,
        RegimeSpec::SingleMarket { dominant } => {
            let leader = world.country(*dominant);
            let follower = world.country(dominant.other());
            follower.i_nom - (leader.i_nom - calib.phi_risk * (follower.f - f_bar))
        }
    }
}

pub fn tax_rule(b: f64, b_target: f64, calib: &Calibration) -> f64 {
    calib.beta_tax * (b - b_target)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NextStocks {
    pub b: f64,
    pub f: f64,
    pub w: f64,
}

/// End-of-period debt, foreign assets and wealth for both countries.
pub fn accumulate_stocks(
    world: &WorldState,
    calib: &Calibration,
) -> Result<[NextStocks; 2], ModelError> {
    let finite = |s: &CountryState| {
        [s.y, s.b, s.f, s.g, s.tau, s.r_real].iter().all(|v| v.is_finite())
    };
    if !finite(&world.home) || !finite(&world.foreign) || !world.z.is_finite() {
        return Err(ModelError::NonFinite("accumulate_stocks"));
    }
    let next = |id: CountryId| {
        let own = world.country(id);
        let partner = world.country(id.other());
        let b = own.b + own.r_real * own.b + own.g - own.tau;
        let f = own.f + partner.r_real * own.f + trade_balance(world, calib, id);
        NextStocks { b, f, w: b + f }
    };
    Ok([next(CountryId::Home), next(CountryId::Foreign)])
}
