//! Perfect-foresight paths of the linear system under given rules.

use nalgebra::{DMatrix, DVector};

use super::rules::{AnticipatedPath, PolicyRule};
use super::schur::{ComplexSchur, C64};
use super::stability::{classify_matrix, Classification, StabilityReport};
use super::trajectory::Trajectory;
use crate::error::SolverError;
use crate::model::StateSpaceModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SaddleOptions {
    pub horizon: usize,
    pub unit_circle_tol: f64,
    /// Largest second difference of the final states accepted as settled.
    pub terminal_tol: f64,
}

impl Default for SaddleOptions {
    fn default() -> Self {
        Self { horizon: 200, unit_circle_tol: 1e-9, terminal_tol: 1e-6 }
    }
}

/// Unique bounded path from predetermined states `start`.
pub fn solve_saddle_path(
    model: &StateSpaceModel,
    rules: &PolicyRule,
    start: &DVector<f64>,
    anticipated: &AnticipatedPath,
    opts: &SaddleOptions,
) -> Result<Trajectory, SolverError> {
    let a = rules.closed_loop(model)?;
    let report = classify_matrix(&a, model.n_jump, opts.unit_circle_tol)?;
    if report.classification != Classification::Determinate {
        return Err(SolverError::NotDeterminate { unstable: report.n_unstable, jumps: model.n_jump });
    }
    let traj = forward_with_pinned_jumps(model, rules, &a, start, anticipated, opts.horizon, model.n_jump)?;
    check_settled(&traj, opts.terminal_tol)?;
    Ok(traj)
}

/// Path of an explosive system. With more unstable roots than jump
/// variables no bounded path exists; the jumps are set to minimise, in
/// least squares, the loading on every unstable root, and the residual
/// loading diverges.
pub fn simulate_divergent(
    model: &StateSpaceModel,
    rules: &PolicyRule,
    start: &DVector<f64>,
    anticipated: &AnticipatedPath,
    horizon: usize,
) -> Result<(Trajectory, StabilityReport), SolverError> {
    let a = rules.closed_loop(model)?;
    let report = classify_matrix(&a, model.n_jump, 1e-9)?;
    if report.classification == Classification::Indeterminate {
        return Err(SolverError::NotDeterminate { unstable: report.n_unstable, jumps: model.n_jump });
    }
    let pinned = report.n_unstable.max(model.n_jump);
    let traj = forward_with_pinned_jumps(model, rules, &a, start, anticipated, horizon, pinned)?;
    Ok((traj, report))
}

/// Forward recursion for models without jump variables.
pub fn simulate_backward(
    model: &StateSpaceModel,
    rules: &PolicyRule,
    start: &DVector<f64>,
    sequence: &AnticipatedPath,
    horizon: usize,
) -> Result<Trajectory, SolverError> {
    if model.n_jump != 0 {
        return Err(SolverError::DimensionMismatch(format!(
            "forward recursion needs a model without jump variables, got {}",
            model.n_jump
        )));
    }
    rules.check(model)?;
    check_start(model, start)?;
    let mut z = start.clone();
    let (mut states, mut insts) = (Vec::with_capacity(horizon), Vec::with_capacity(horizon));
    for t in 0..horizon {
        let u = rules.apply(&z) + sequence.at(t);
        let next = model.step(&z, &u);
        states.push(z);
        insts.push(u);
        z = next;
    }
    Ok(Trajectory::from_path(model, states, insts, z))
}

fn check_start(model: &StateSpaceModel, start: &DVector<f64>) -> Result<(), SolverError> {
    if start.len() != model.n_pre {
        return Err(SolverError::DimensionMismatch(format!(
            "start has {} entries, model has {} predetermined states",
            start.len(),
            model.n_pre
        )));
    }
    Ok(())
}

fn forward_with_pinned_jumps(
    model: &StateSpaceModel,
    rules: &PolicyRule,
    closed: &DMatrix<f64>,
    start: &DVector<f64>,
    anticipated: &AnticipatedPath,
    horizon: usize,
    pinned: usize,
) -> Result<Trajectory, SolverError> {
    check_start(model, start)?;
    let (np, nj, n) = (model.n_pre, model.n_jump, model.n_state());
    let mut full_start = DVector::zeros(n);
    full_start.rows_mut(0, np).copy_from(start);
    if nj == 0 {
        // Without forward-looking rows the path is the plain recursion.
        let mut z = full_start;
        let (mut states, mut insts) = (Vec::new(), Vec::new());
        for t in 0..horizon {
            let u = rules.apply(&z.rows(0, np).into_owned()) + anticipated.at(t);
            let next = model.step(&z, &u);
            states.push(z);
            insts.push(u);
            z = next;
        }
        return Ok(Trajectory::from_path(model, states, insts, z));
    }

    let mut schur = ComplexSchur::new(closed)?;
    schur.order_largest_last(pinned);
    let qh = schur.q.adjoint();
    let top = n - pinned;
    let t22 = schur.t.view((top, top), (pinned, pinned)).into_owned();
    let qh_u = qh.rows(top, pinned).into_owned();
    let qh_us = qh_u.columns(0, np).into_owned();
    let qh_ux = qh_u.columns(np, nj).into_owned();
    let bc = model.input.map(|v| C64::new(v, 0.0));
    let forcing = |t: usize| -> DVector<C64> {
        let u = anticipated.at(t).map(|v| C64::new(v, 0.0));
        &qh_u * (&bc * u)
    };

    // Unstable coordinates solved backwards from the settled fixed point.
    let settle = anticipated.settle_date();
    let ident = DMatrix::<C64>::identity(pinned, pinned);
    let fixed = (&ident - &t22)
        .lu()
        .solve(&forcing(settle))
        .ok_or(SolverError::RankCondition)?;
    let t22_lu = t22.clone().lu();
    let mut unstable = vec![fixed.clone(); settle + 1];
    for t in (0..settle).rev() {
        let rhs = &unstable[t + 1] - forcing(t);
        unstable[t] = t22_lu.solve(&rhs).ok_or(SolverError::RankCondition)?;
    }
    // Real jumps from complex coordinates: stack real and imaginary rows.
    let stacked = |m: &DMatrix<C64>| {
        let (r, c) = m.shape();
        DMatrix::from_fn(2 * r, c, |i, j| if i < r { m[(i, j)].re } else { m[(i - r, j)].im })
    };
    let svd = stacked(&qh_ux).svd(true, true);
    let sv_max = svd.singular_values.max();
    let sv_min = svd.singular_values.min();
    if !(sv_max > 1e-12 && sv_min > 1e-10 * sv_max) {
        return Err(SolverError::RankCondition);
    }
    let solve_jumps = |rhs: &DVector<C64>| -> Result<DVector<f64>, SolverError> {
        let rhs = stacked(&DMatrix::from_column_slice(rhs.len(), 1, rhs.as_slice()));
        let x = svd.solve(&rhs, 0.0).map_err(|_| SolverError::RankCondition)?;
        Ok(x.column(0).into_owned())
    };

    let mut s = start.clone();
    let (mut states, mut insts) = (Vec::with_capacity(horizon), Vec::with_capacity(horizon));
    let mut z = DVector::zeros(n);
    for t in 0..horizon {
        let yu = &unstable[t.min(settle)];
        let sc = s.map(|v| C64::new(v, 0.0));
        let x = solve_jumps(&(yu - &qh_us * sc))?;
        z = DVector::zeros(n);
        z.rows_mut(0, np).copy_from(&s);
        z.rows_mut(np, nj).copy_from(&x);
        let u = rules.apply(&s) + anticipated.at(t);
        let next = model.step(&z, &u);
        states.push(z.clone());
        insts.push(u);
        s = next.rows(0, np).into_owned();
        z = next;
    }
    if horizon == 0 {
        z = full_start;
    }
    Ok(Trajectory::from_path(model, states, insts, z))
}

fn check_settled(traj: &Trajectory, tol: f64) -> Result<(), SolverError> {
    let n = traj.states.len();
    if n < 2 {
        return Ok(());
    }
    let last = &traj.terminal;
    let prev = &traj.states[n - 1];
    let prev2 = &traj.states[n - 2];
    let dev = (last - prev * 2.0 + prev2).amax();
    if !(dev <= tol) {
        return Err(SolverError::HorizonTooShort { deviation: dev, tolerance: tol });
    }
    Ok(())
}
