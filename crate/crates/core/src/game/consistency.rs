use nalgebra::{DMatrix, DVector};

use super::loss::{LossRows, Objective};
use super::players::Player;
use super::solve::{solve_cooperative, solve_game, EquilibriumResult, GameOptions};
use crate::error::{GameError, SolverError};
use crate::model::StateSpaceModel;
use crate::solver::{solve_saddle_path, AnticipatedPath, PolicyRule, SaddleOptions, Trajectory};

fn path_gap(a: &Trajectory, b: &Trajectory) -> f64 {
    let mut worst = 0.0_f64;
    for t in 0..a.horizon.min(b.horizon) {
        worst = worst.max((&a.states[t] - &b.states[t]).amax());
        worst = worst.max((&a.instruments[t] - &b.instruments[t]).amax());
    }
    worst
}

/// Re-solves the equilibrium from the state reached at `date` and returns
/// the largest gap between the new path and the original tail.
pub fn time_consistency_check(eq: &EquilibriumResult, model: &StateSpaceModel, date: usize) -> Result<f64, GameError> {
    let horizon = eq.trajectory.horizon;
    if date >= horizon {
        return Err(SolverError::DimensionMismatch(format!("date {date} is beyond the horizon {horizon}")).into());
    }
    let start = eq.trajectory.states[date].rows(0, model.n_pre).into_owned();
    let opts = GameOptions { horizon: horizon - date, ..eq.options };
    let again = solve_game(model, &eq.players, &eq.concept, &start, &opts)?;
    Ok(path_gap(&again.trajectory, &eq.trajectory.tail(date)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommitmentGap {
    /// Largest gap between the re-optimised plan and the original tail.
    pub deviation: f64,
    pub plan: Trajectory,
    pub replanned: Trajectory,
}

/// Optimal precommitment plan of an equal-weight planner over `horizon`
/// periods: instrument paths chosen once at date 0 on top of the
/// stationary cooperative rule, with jumps anticipating the whole plan.
pub fn precommitment_plan(
    model: &StateSpaceModel,
    players: &[Player],
    base: &PolicyRule,
    start: &DVector<f64>,
    horizon: usize,
) -> Result<Trajectory, GameError> {
    let objective = Objective::combine(&players.iter().map(|p| (1.0, &p.loss)).collect::<Vec<_>>());
    let discount = objective
        .discount()
        .ok_or_else(|| GameError::InvalidPlayers("objective mixes discount factors".into()))?;
    let rows = LossRows::of(model, &objective);
    let inst: Vec<usize> = players
        .iter()
        .filter(|p| p.spec.active)
        .flat_map(|p| p.spec.instruments.iter().filter_map(|id| model.instrument_index(*id)))
        .collect();
    let opts = SaddleOptions { horizon, terminal_tol: f64::INFINITY, ..Default::default() };
    let nu = model.n_inst();

    let residuals = |traj: &Trajectory| -> DVector<f64> {
        let k = rows.w.len();
        let mut out = DVector::zeros(k * horizon);
        let mut factor = 1.0_f64;
        for t in 0..horizon {
            let e = &rows.c * &traj.states[t] + &rows.d * &traj.instruments[t];
            for i in 0..k {
                out[t * k + i] = (factor * rows.w[i]).sqrt() * e[i];
            }
            factor *= discount;
        }
        out
    };
    let free = solve_saddle_path(model, base, start, &AnticipatedPath::zero(nu), &opts)?;
    let e0 = residuals(&free);
    let zero = DVector::zeros(model.n_pre);
    let mut g = DMatrix::zeros(e0.len(), inst.len() * horizon);
    for t in 0..horizon {
        for (j, &k) in inst.iter().enumerate() {
            let imp = solve_saddle_path(model, base, &zero, &AnticipatedPath::impulse(nu, k, 1.0, t), &opts)?;
            g.set_column(t * inst.len() + j, &residuals(&imp));
        }
    }
    let svd = g.svd(true, true);
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let v = svd
        .solve(&(-e0), top * 1e-13)
        .map_err(|_| SolverError::DecompositionFailure)?;
    let mut values = vec![DVector::zeros(nu); horizon];
    for t in 0..horizon {
        for (j, &k) in inst.iter().enumerate() {
            values[t][k] = v[t * inst.len() + j];
        }
    }
    let plan = AnticipatedPath { values, settled: DVector::zeros(nu) };
    Ok(solve_saddle_path(model, base, start, &plan, &opts)?)
}

/// Shows the inconsistency of precommitment: the plan made at date 0 is
/// re-optimised from the state it reaches at `date`.
pub fn commitment_gap(
    model: &StateSpaceModel,
    players: &[Player],
    start: &DVector<f64>,
    horizon: usize,
    date: usize,
) -> Result<CommitmentGap, GameError> {
    if date >= horizon {
        return Err(SolverError::DimensionMismatch(format!("date {date} is beyond the horizon {horizon}")).into());
    }
    let coop = solve_cooperative(model, players, None, start, &GameOptions { horizon: 1, ..Default::default() })?;
    let base = coop.rules.at(0);
    let plan = precommitment_plan(model, players, &base, start, horizon)?;
    let mid = plan.states[date].rows(0, model.n_pre).into_owned();
    let replanned = precommitment_plan(model, players, &base, &mid, horizon - date)?;
    let deviation = path_gap(&replanned, &plan.tail(date));
    Ok(CommitmentGap { deviation, plan, replanned })
}
