use super::trajectory::Trajectory;
use crate::error::SolverError;
use crate::model::{EquationKind, StateSpaceModel, Var};

/// Largest violation of any model equation along `traj`.
pub fn residual_check(model: &StateSpaceModel, traj: &Trajectory) -> Result<f64, SolverError> {
    let (nz, nu, nv) = (model.n_state(), model.n_inst(), model.statics.len());
    let dims_ok = traj.states.len() == traj.horizon
        && traj.instruments.len() == traj.horizon
        && traj.statics.len() == traj.horizon
        && traj.terminal.len() == nz
        && traj.states.iter().all(|z| z.len() == nz)
        && traj.instruments.iter().all(|u| u.len() == nu)
        && traj.statics.iter().all(|v| v.len() == nv);
    if !dims_ok {
        return Err(SolverError::DimensionMismatch("trajectory does not match the model".into()));
    }
    let mut worst = 0.0_f64;
    for t in 0..traj.horizon {
        let (z, u, v) = (&traj.states[t], &traj.instruments[t], &traj.statics[t]);
        let next = traj.states.get(t + 1).unwrap_or(&traj.terminal);
        for eq in &model.equations {
            let sum: f64 = eq
                .terms
                .iter()
                .map(|&(var, c)| {
                    c * match var {
                        Var::State(k) => z[k],
                        Var::Static(k) => v[k],
                        Var::Inst(k) => u[k],
                    }
                })
                .sum();
            let r = match eq.kind {
                EquationKind::Static => sum,
                EquationKind::Transition(k) => next[k] - sum,
            };
            if !r.is_finite() {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(r.abs());
        }
    }
    Ok(worst)
}
