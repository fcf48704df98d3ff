use crate::error::ScenarioError;
use crate::game::{
    default_players, nash_bargaining, solve_cooperative, solve_feedback_nash, solve_stackelberg,
    EquilibriumResult, GameOptions, Player, PlayerId, PlayerLoss, PolicyMode,
};
use crate::model::{assemble_with, StateSpaceModel};
use crate::solver::{
    classify_matrix, simulate_divergent, solve_saddle_path, AnticipatedPath, Classification, PolicyRule,
    SaddleOptions, StabilityReport, Trajectory,
};

use super::diagnostics::{convergence_diagnostics, DiagnosticsReport};
use super::scenario::Scenario;

#[derive(Debug, Clone)]
pub struct ScenarioOutcome {
    pub scenario: Scenario,
    pub trajectory: Option<Trajectory>,
    pub report: DiagnosticsReport,
    pub equilibrium: Option<EquilibriumResult>,
}

pub fn scenario_model(s: &Scenario) -> Result<StateSpaceModel, ScenarioError> {
    Ok(assemble_with(&s.calibration, s.regime, s.behavior, s.shock.drivers(), s.lead())?)
}

/// The cast for a scenario with its passive players switched off.
pub fn scenario_players(s: &Scenario, model: &StateSpaceModel) -> Vec<Player> {
    let mut players = default_players(model, &s.losses, s.independence);
    for p in &mut players {
        if s.passive_players.contains(&p.spec.id) {
            p.spec.active = false;
        }
    }
    players
}

fn index_of(players: &[Player], id: PlayerId) -> Option<usize> {
    players.iter().position(|p| p.spec.id == id)
}

/// Solves the scenario in a given mode.
pub fn solve_mode(s: &Scenario, mode: PolicyMode) -> Result<(Trajectory, StabilityReport, Option<EquilibriumResult>), ScenarioError> {
    s.validate()?;
    let model = scenario_model(s)?;
    let players = scenario_players(s, &model);
    let start = s.shock.initial_state(&model);
    let opts = GameOptions {
        horizon: s.horizon,
        tolerance: s.solver.game_tolerance,
        max_iterations: s.solver.max_iterations,
        ..Default::default()
    };
    let eq = match mode {
        PolicyMode::Passive => {
            let rules = PolicyRule::passive(&model);
            let stability = classify_matrix(&rules.closed_loop(&model)?, model.n_jump, s.solver.unit_circle_tol)?;
            let zero = AnticipatedPath::zero(model.n_inst());
            let traj = match stability.classification {
                Classification::Determinate => {
                    let so = SaddleOptions {
                        horizon: s.horizon,
                        unit_circle_tol: s.solver.unit_circle_tol,
                        terminal_tol: f64::INFINITY,
                    };
                    solve_saddle_path(&model, &rules, &start, &zero, &so)?
                }
                _ => simulate_divergent(&model, &rules, &start, &zero, s.horizon)?.0,
            };
            return Ok((traj, stability, None));
        }
        PolicyMode::Nash => solve_feedback_nash(&model, &players, &start, &opts)?,
        PolicyMode::Cooperative => solve_cooperative(&model, &players, None, &start, &opts)?,
        PolicyMode::Stackelberg => {
            let leader_id = s.stackelberg_leader.or_else(|| s.regime.dominant().map(PlayerId::central_bank));
            let leader_id = leader_id.ok_or_else(|| ScenarioError::Invalid("Stackelberg needs a leader".into()))?;
            let l = index_of(&players, leader_id)
                .ok_or_else(|| ScenarioError::Invalid(format!("leader {} is not a player", leader_id.label())))?;
            let leader = players[l].clone();
            let followers: Vec<Player> = players.iter().enumerate().filter(|(i, _)| *i != l).map(|(_, p)| p.clone()).collect();
            solve_stackelberg(&model, &leader, &followers, &start, &opts)?
        }
        PolicyMode::Bargaining => {
            let members = s.bargaining.sides.members(s.regime);
            let sides = [0, 1].map(|k| members[k].iter().filter_map(|id| index_of(&players, *id)).collect::<Vec<_>>());
            nash_bargaining(&model, &players, &sides, &start, &opts, s.bargaining.resolution)?
        }
    };
    Ok((eq.trajectory.clone(), eq.path_stability.clone(), Some(eq)))
}

/// Runs a scenario; failures are recorded in the report.
pub fn run_scenario(s: &Scenario) -> ScenarioOutcome {
    match solve_mode(s, s.policy_mode) {
        Ok((traj, stability, eq)) => {
            let mut report = convergence_diagnostics(&traj, stability);
            report.losses = match &eq {
                Some(eq) => eq.losses.clone(),
                None => passive_losses(s, &traj),
            };
            ScenarioOutcome { scenario: s.clone(), trajectory: Some(traj), report, equilibrium: eq }
        }
        Err(e) => {
            let report = DiagnosticsReport {
                converged: super::diagnostics::Convergence { converged: false, tolerance: super::diagnostics::CONVERGENCE_TOL, date: None },
                long_run: Default::default(),
                sign_pattern: Vec::new(),
                stability: StabilityReport::from_moduli(Vec::new(), 0, 0.0),
                losses: Vec::new(),
                debt_gap: [f64::NAN; 2],
                explosive: false,
                error: Some(e.to_string()),
            };
            ScenarioOutcome { scenario: s.clone(), trajectory: None, report, equilibrium: None }
        }
    }
}

fn passive_losses(s: &Scenario, traj: &Trajectory) -> Vec<PlayerLoss> {
    match scenario_model(s) {
        Ok(model) => scenario_players(s, &model)
            .iter()
            .map(|p| PlayerLoss { name: p.name().to_string(), loss: p.loss.evaluate(traj) })
            .collect(),
        Err(_) => Vec::new(),
    }
}
