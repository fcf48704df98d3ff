//! Long-run positions once every debt stock sits on its target.

use nalgebra::{Matrix4, Vector4};

use super::calibration::{Calibration, BASELINE_REAL_RATE};
use super::types::{CountryId, RegimeSpec, WorldState};
use crate::error::ModelError;

/// Long-run world in levels for debt targets `b_targets` (home, foreign).
///
/// Wealth demand has to absorb debt plus foreign assets in each country,
/// foreign positions net to zero across the pair, and the parity condition
/// ties the two real rates together.
pub fn steady_state(
    calib: &Calibration,
    regime: RegimeSpec,
    b_targets: [f64; 2],
) -> Result<WorldState, ModelError> {
    calib.validate()?;
    if calib.a <= 0.0 {
        return Err(ModelError::NoSteadyState("wealth demand is flat in the real rate".into()));
    }
    let db = [b_targets[0] - calib.b_bar, b_targets[1] - calib.b_bar];
    // Unknowns: dr_home, dr_foreign, df_home, df_foreign.
    let mut m = Matrix4::zeros();
    let mut rhs = Vector4::zeros();
    m[(0, 2)] = 1.0;
    m[(0, 3)] = 1.0;
    for k in 0..2 {
        m[(1 + k, k)] = calib.a;
        m[(1 + k, 2 + k)] = -1.0;
        rhs[1 + k] = db[k];
    }
    match regime {
        RegimeSpec::Flexible => {
            m[(3, 0)] = 1.0;
            m[(3, 1)] = -1.0;
            m[(3, 2)] = -calib.phi_risk;
        }
        RegimeSpec::Emu => {
            m[(3, 0)] = 1.0;
            m[(3, 1)] = -1.0;
        }
        RegimeSpec::SingleMarket { dominant } => {
            let (d, dd) = match dominant {
                CountryId::Home => (0, 1),
                CountryId::Foreign => (1, 0),
            };
            m[(3, dd)] = 1.0;
            m[(3, d)] = -1.0;
            m[(3, 2 + dd)] = calib.phi_risk;
        }
    }
    let sol = m
        .lu()
        .solve(&rhs)
        .filter(|s| s.iter().all(|v| v.is_finite()))
        .ok_or_else(|| ModelError::NoSteadyState("long-run closure is singular".into()))?;

    let f_bar = calib.baseline_nfa();
    let mut world = WorldState::default();
    for (k, id) in CountryId::BOTH.into_iter().enumerate() {
        let s = world.country_mut(id);
        s.r_real = BASELINE_REAL_RATE + sol[k];
        s.i_nom = s.r_real;
        s.b = b_targets[k];
        s.f = f_bar + sol[2 + k];
        s.w = s.b + s.f;
        // Spending that keeps debt constant with taxes at the rule's rest point.
        s.g = -sol[k] * b_targets[k];
    }
    Ok(world)
}
