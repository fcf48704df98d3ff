use serde::{Deserialize, Serialize};

use crate::game::PlayerLoss;
use crate::model::{CountryId, WorldState};
use crate::solver::{StabilityReport, Trajectory};

pub const NOISE_FLOOR: f64 = 1e-9;
pub const CONVERGENCE_TOL: f64 = 1e-4;
pub const EXPLOSION_BOUND: f64 = 1e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Convergence {
    pub converged: bool,
    pub tolerance: f64,
    /// First date after which every series stays within tolerance of its
    /// terminal value.
    pub date: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignPattern {
    pub variable: String,
    /// Mean over dates 0 to 2.
    pub impact: f64,
    /// Mean over the final tenth of the horizon.
    pub long_run: f64,
    pub impact_sign: i8,
    pub long_run_sign: i8,
    pub reversal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub converged: Convergence,
    pub long_run: WorldState,
    pub sign_pattern: Vec<SignPattern>,
    pub stability: StabilityReport,
    pub losses: Vec<PlayerLoss>,
    /// Terminal debt minus terminal debt target, home then foreign.
    pub debt_gap: [f64; 2],
    pub explosive: bool,
    pub error: Option<String>,
}

impl DiagnosticsReport {
    pub fn pattern(&self, variable: &str) -> Option<&SignPattern> {
        self.sign_pattern.iter().find(|p| p.variable == variable)
    }
}

pub fn sign_of(x: f64) -> i8 {
    if x > NOISE_FLOOR {
        1
    } else if x < -NOISE_FLOOR {
        -1
    } else {
        0
    }
}

pub fn is_reversal(impact: f64, long_run: f64) -> bool {
    let (a, b) = (sign_of(impact), sign_of(long_run));
    a != 0 && b != 0 && a != b
}

type Field = (&'static str, fn(&WorldState, CountryId) -> f64);

/// Reported variables in output column order.
pub const COUNTRY_FIELDS: [Field; 10] = [
    ("y", |w, c| w.country(c).y),
    ("pi", |w, c| w.country(c).pi),
    ("p", |w, c| w.country(c).p),
    ("r", |w, c| w.country(c).r_real),
    ("i", |w, c| w.country(c).i_nom),
    ("b", |w, c| w.country(c).b),
    ("f", |w, c| w.country(c).f),
    ("w", |w, c| w.country(c).w),
    ("g", |w, c| w.country(c).g),
    ("tau", |w, c| w.country(c).tau),
];

/// Named series of a trajectory: per-country fields then e and z.
pub fn named_series(traj: &Trajectory) -> Vec<(String, Vec<f64>)> {
    let mut out = Vec::new();
    for c in CountryId::BOTH {
        for (name, get) in COUNTRY_FIELDS {
            out.push((format!("{name}_{}", c.label()), traj.series(|w| get(w, c))));
        }
    }
    out.push(("e".into(), traj.series(|w| w.e)));
    out.push(("z".into(), traj.series(|w| w.z)));
    out
}

pub fn impact_mean(x: &[f64]) -> f64 {
    let n = x.len().min(3);
    if n == 0 {
        return 0.0;
    }
    x[..n].iter().sum::<f64>() / n as f64
}

pub fn tail_len(horizon: usize) -> usize {
    horizon.div_ceil(10).max(1)
}

pub fn tail_mean(x: &[f64]) -> f64 {
    if x.is_empty() {
        return 0.0;
    }
    let n = tail_len(x.len()).min(x.len());
    x[x.len() - n..].iter().sum::<f64>() / n as f64
}

/// First date from which `x` stays within `tol` of its last value.
pub fn settle_date(x: &[f64], tol: f64) -> Option<usize> {
    let last = *x.last()?;
    if !last.is_finite() {
        return None;
    }
    let mut date = x.len() - 1;
    for t in (0..x.len()).rev() {
        if (x[t] - last).abs() <= tol {
            date = t;
        } else {
            break;
        }
    }
    Some(date)
}

pub fn convergence_diagnostics(traj: &Trajectory, stability: StabilityReport) -> DiagnosticsReport {
    let series = named_series(traj);
    let peak = traj.max_abs();
    let explosive = !(peak <= EXPLOSION_BOUND);
    let cutoff = traj.horizon.saturating_sub(tail_len(traj.horizon));
    let date = series
        .iter()
        .map(|(_, x)| settle_date(x, CONVERGENCE_TOL))
        .try_fold(0usize, |acc, d| d.map(|d| acc.max(d)));
    let date = if traj.horizon == 0 { Some(0) } else { date };
    let converged = !explosive && date.is_some_and(|d| d < cutoff.max(1));
    let sign_pattern = series
        .iter()
        .map(|(name, x)| {
            let impact = impact_mean(x);
            let long_run = tail_mean(x);
            SignPattern {
                variable: name.clone(),
                impact,
                long_run,
                impact_sign: sign_of(impact),
                long_run_sign: sign_of(long_run),
                reversal: is_reversal(impact, long_run),
            }
        })
        .collect();
    let long_run = traj.worlds.last().copied().unwrap_or_default();
    let targets = traj.debt_targets.last().copied().unwrap_or([0.0; 2]);
    let debt_gap = [long_run.home.b - targets[0], long_run.foreign.b - targets[1]];
    DiagnosticsReport {
        converged: Convergence { converged, tolerance: CONVERGENCE_TOL, date: if converged { date } else { None } },
        long_run,
        sign_pattern,
        stability,
        losses: Vec::new(),
        debt_gap,
        explosive,
        error: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::PolicyMode;
    use crate::model::{BehaviorSpec, CountryId, RegimeSpec};
    use crate::scenarios::{debt_target_scenario, run_scenario};

    #[test]
    fn signs_respect_the_noise_floor() {
        assert_eq!(sign_of(2e-9), 1);
        assert_eq!(sign_of(-2e-9), -1);
        assert_eq!(sign_of(5e-10), 0);
        assert!(is_reversal(-1e-3, 1e-3));
        assert!(!is_reversal(-1e-3, 1e-12));
        assert!(!is_reversal(1e-3, 2e-3));
    }

    #[test]
    fn settle_and_tail() {
        let x = [1.0, 0.5, 0.1, 0.00002, 0.00001, 0.0];
        assert_eq!(settle_date(&x, 1e-4), Some(3));
        assert_eq!(settle_date(&[f64::NAN], 1e-4), None);
        assert_eq!(settle_date(&[], 1e-4), None);
        assert_eq!(tail_len(100), 10);
        assert_eq!(tail_len(5), 1);
        assert_eq!(tail_mean(&x), 0.0);
        assert!((impact_mean(&x) - 1.6 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn unshocked_path_converges_at_once() {
        let mut s = debt_target_scenario(CountryId::Home, 0.0, RegimeSpec::Emu, BehaviorSpec::default(), PolicyMode::Passive);
        s.horizon = 40;
        let out = run_scenario(&s);
        let r = out.report;
        assert!(r.error.is_none(), "{:?}", r.error);
        assert!(r.converged.converged);
        assert_eq!(r.converged.date, Some(0));
        assert!(!r.explosive);
        assert!(r.sign_pattern.iter().all(|p| p.impact_sign == 0 && !p.reversal));
    }

    #[test]
    fn passive_union_cut_is_flagged_explosive() {
        let s = debt_target_scenario(CountryId::Home, 0.03, RegimeSpec::Emu, BehaviorSpec::default(), PolicyMode::Passive);
        let r = run_scenario(&s).report;
        assert!(r.explosive);
        assert!(!r.converged.converged);
        assert_eq!(r.converged.date, None);
    }
}
