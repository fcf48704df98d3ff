//! Qualitative sign checks for the debt-target experiments.
//!
//! These are calibration-dependent statements. They are asserted only for
//! the shipped defaults; under other calibrations they are reported.

use serde::{Deserialize, Serialize};

use crate::game::{PlayerId, PolicyMode};
use crate::model::{steady_state, BehaviorSpec, Calibration, CountryId, RegimeSpec};

use super::diagnostics::{impact_mean, tail_mean, NOISE_FLOOR};
use super::run::run_scenario;
use super::scenario::{debt_target_scenario, Scenario};

/// Size of the headline debt-target cut, 30 to 27 points of GDP.
pub const HEADLINE_CUT: f64 = 0.03;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignCheck {
    pub label: String,
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

fn check(label: &str, description: &str, passed: bool, detail: String) -> SignCheck {
    SignCheck { label: label.into(), description: description.into(), passed, detail }
}

fn failed(label: &str, description: &str, err: &str) -> SignCheck {
    check(label, description, false, format!("error: {err}"))
}

fn with_calibration(mut s: Scenario, calib: &Calibration) -> Scenario {
    s.calibration = *calib;
    s
}

/// Passive EMU debt cut: recession, disinflation, debt off target.
pub fn emu_passive_scenario(calib: &Calibration) -> Scenario {
    let s = debt_target_scenario(CountryId::Home, HEADLINE_CUT, RegimeSpec::Emu, BehaviorSpec::default(), PolicyMode::Passive);
    with_calibration(s, calib)
}

/// Debt cut in the dominated country with its government passive.
pub fn sm_dominated_scenario(calib: &Calibration) -> Scenario {
    let regime = RegimeSpec::SingleMarket { dominant: CountryId::Foreign };
    let mut s = debt_target_scenario(CountryId::Home, HEADLINE_CUT, regime, BehaviorSpec::default(), PolicyMode::Nash);
    s.name = "debt_target_sm_dominated".into();
    s.passive_players = vec![PlayerId::GovHome];
    with_calibration(s, calib)
}

/// Debt cut in the dominant country; the dominated government stays passive.
pub fn sm_dominant_scenario(calib: &Calibration) -> Scenario {
    let regime = RegimeSpec::SingleMarket { dominant: CountryId::Foreign };
    let mut s = debt_target_scenario(CountryId::Foreign, HEADLINE_CUT, regime, BehaviorSpec::default(), PolicyMode::Nash);
    s.name = "debt_target_sm_dominant".into();
    s.passive_players = vec![PlayerId::GovHome];
    with_calibration(s, calib)
}

pub fn emu_nash_scenario(calib: &Calibration) -> Scenario {
    let s = debt_target_scenario(CountryId::Home, HEADLINE_CUT, RegimeSpec::Emu, BehaviorSpec::default(), PolicyMode::Nash);
    with_calibration(s, calib)
}

pub fn check_emu_passive(calib: &Calibration) -> SignCheck {
    let d = "passive EMU debt cut: y < 0 and inflation falling throughout, debt not at target";
    let out = run_scenario(&emu_passive_scenario(calib));
    let Some(traj) = &out.trajectory else { return failed("a", d, out.report.error.as_deref().unwrap_or("")) };
    let y = traj.series(|w| w.home.y);
    let pi = traj.series(|w| w.home.pi);
    let recession = y.iter().all(|v| *v < -NOISE_FLOOR);
    let falling = pi.windows(2).all(|p| p[1] < p[0] - NOISE_FLOOR);
    let gap = out.report.debt_gap[0];
    let off_target = !out.report.converged.converged || !(gap.abs() <= out.report.converged.tolerance);
    let worst_y = y.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let detail = format!(
        "max y_home {worst_y:.3e}, pi_home {:.3e} -> {:.3e}, debt gap {gap:.3e}, converged {}",
        pi.first().unwrap_or(&0.0),
        pi.last().unwrap_or(&0.0),
        out.report.converged.converged
    );
    check("a", d, recession && falling && off_target, detail)
}

pub fn check_sm_dominated(calib: &Calibration) -> SignCheck {
    let d = "SM dominated-country debt cut: dominated rates fall, f rises, debt converges";
    let out = run_scenario(&sm_dominated_scenario(calib));
    let Some(traj) = &out.trajectory else { return failed("b", d, out.report.error.as_deref().unwrap_or("")) };
    let i = impact_mean(&traj.series(|w| w.home.i_nom));
    let r = impact_mean(&traj.series(|w| w.home.r_real));
    let f = tail_mean(&traj.series(|w| w.home.f));
    let converged = out.report.converged.converged;
    let detail = format!(
        "i_home short {i:.3e}, r_home short {r:.3e}, f_home tail {f:.3e}, converged {converged}, debt gap {:.3e}",
        out.report.debt_gap[0]
    );
    check("b", d, i < -NOISE_FLOOR && r < -NOISE_FLOOR && f > NOISE_FLOOR && converged, detail)
}

pub fn check_sm_dominant(calib: &Calibration) -> SignCheck {
    let d = "SM dominant-country debt cut: dominated-country rates rise";
    let out = run_scenario(&sm_dominant_scenario(calib));
    let Some(traj) = &out.trajectory else { return failed("c", d, out.report.error.as_deref().unwrap_or("")) };
    let i = impact_mean(&traj.series(|w| w.home.i_nom));
    let r = impact_mean(&traj.series(|w| w.home.r_real));
    check("c", d, i > NOISE_FLOOR && r > NOISE_FLOOR, format!("i_home short {i:.3e}, r_home short {r:.3e}"))
}

pub fn check_nash_reversal(calib: &Calibration) -> SignCheck {
    let d = "active Nash debt cut: g negative short term and positive in the tail, i_nom below baseline short term";
    let out = run_scenario(&emu_nash_scenario(calib));
    let Some(traj) = &out.trajectory else { return failed("d", d, out.report.error.as_deref().unwrap_or("")) };
    let g = traj.series(|w| w.home.g);
    let (g0, g1) = (impact_mean(&g), tail_mean(&g));
    let i = impact_mean(&traj.series(|w| w.home.i_nom));
    let detail = format!("g_home short {g0:.3e}, tail {g1:.3e}, i short {i:.3e}");
    check("d", d, g0 < -NOISE_FLOOR && g1 > NOISE_FLOOR && i < -NOISE_FLOOR, detail)
}

pub fn check_union_rate(calib: &Calibration) -> SignCheck {
    let d = "long-run union real rate falls after the debt cut";
    let targets = [calib.b_bar - HEADLINE_CUT, calib.b_bar];
    match (steady_state(calib, RegimeSpec::Emu, [calib.b_bar; 2]), steady_state(calib, RegimeSpec::Emu, targets)) {
        (Ok(base), Ok(cut)) => {
            let dr = cut.home.r_real - base.home.r_real;
            check("e", d, dr < -NOISE_FLOOR, format!("union real rate change {dr:.3e}"))
        }
        (Err(e), _) | (_, Err(e)) => failed("e", d, &e.to_string()),
    }
}

/// Runs all five checks in order.
pub fn sign_suite(calib: &Calibration) -> Vec<SignCheck> {
    vec![
        check_emu_passive(calib),
        check_sm_dominated(calib),
        check_sm_dominant(calib),
        check_nash_reversal(calib),
        check_union_rate(calib),
    ]
}
