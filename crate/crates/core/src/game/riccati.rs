//! Discretionary (Markov-perfect) best responses for linear-quadratic games
//! with forward-looking variables.
//!
//! Each period the jump variables are expected to follow `x = N s`. Given
//! that belief and the continuation value matrices, the period's rules are
//! found by solving every active player's first-order conditions at once.

use nalgebra::{DMatrix, DVector};

use super::loss::LossRows;
use crate::error::GameError;
use crate::model::StateSpaceModel;

#[derive(Debug, Clone)]
pub(crate) struct Agent {
    /// Model instrument indices the agent controls.
    pub inst: Vec<usize>,
    pub rows: LossRows,
    pub discount: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Order {
    Simultaneous,
    /// Index into the agent list of the player moving first.
    Leader(usize),
}

/// Dynamics of the predetermined block once jumps are substituted out.
pub(crate) struct Reduced {
    pub js: DMatrix<f64>,
    pub ju: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    /// Per agent: loss rows on (s, u).
    pub ch: Vec<DMatrix<f64>>,
    pub dh: Vec<DMatrix<f64>>,
}

pub(crate) fn reduce(model: &StateSpaceModel, agents: &[Agent], n: &DMatrix<f64>) -> Result<Reduced, GameError> {
    let (np, nj, nu) = (model.n_pre, model.n_jump, model.n_inst());
    let a11 = model.transition.view((0, 0), (np, np));
    let (js, ju) = if nj == 0 {
        (DMatrix::zeros(0, np), DMatrix::zeros(0, nu))
    } else {
        let a12 = model.transition.view((0, np), (np, nj));
        let a21 = model.transition.view((np, 0), (nj, np));
        let a22 = model.transition.view((np, np), (nj, nj));
        let b1 = model.input.rows(0, np);
        let b2 = model.input.rows(np, nj);
        let m = n * a12 - a22;
        let lu = m.lu();
        let js = lu
            .solve(&(a21 - n * a11))
            .ok_or(crate::error::SolverError::RankCondition)?;
        let ju = lu
            .solve(&(b2 - n * b1))
            .ok_or(crate::error::SolverError::RankCondition)?;
        (js, ju)
    };
    let a12 = model.transition.columns(np, nj).rows(0, np).into_owned();
    let a = a11 + &a12 * &js;
    let b = model.input.rows(0, np) + &a12 * &ju;
    let mut ch = Vec::with_capacity(agents.len());
    let mut dh = Vec::with_capacity(agents.len());
    for ag in agents {
        let c1 = ag.rows.c.columns(0, np);
        let c2 = ag.rows.c.columns(np, nj);
        ch.push(c1 + &c2 * &js);
        dh.push(&ag.rows.d + &c2 * &ju);
    }
    Ok(Reduced { js, ju, a, b, ch, dh })
}

fn weighted(w: &DVector<f64>, m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    for (i, mut row) in out.row_iter_mut().enumerate() {
        row *= w[i];
    }
    out
}

/// Least-squares solve that tolerates singular systems, e.g. a player who
/// is indifferent about its instrument.
pub(crate) fn robust_solve(lhs: &DMatrix<f64>, rhs: &DMatrix<f64>) -> DMatrix<f64> {
    if lhs.nrows() == 0 {
        return DMatrix::zeros(lhs.ncols(), rhs.ncols());
    }
    let svd = lhs.clone().svd(true, true);
    let top = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    if top == 0.0 {
        return DMatrix::zeros(lhs.ncols(), rhs.ncols());
    }
    svd.solve(rhs, top * 1e-13).expect("SVD computed with both factors")
}

fn cols(m: &DMatrix<f64>, idx: &[usize]) -> DMatrix<f64> {
    m.select_columns(idx.iter())
}

fn scatter(nu: usize, idx: &[usize], x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut full = DMatrix::zeros(nu, x.ncols());
    for (r, &k) in idx.iter().enumerate() {
        full.set_row(k, &x.row(r));
    }
    full
}

/// First-order-condition blocks of agent `i` against instrument set `idx`:
/// returns (sensitivity to u_idx, sensitivity to s).
fn foc_block(
    red: &Reduced,
    agents: &[Agent],
    v: &[DMatrix<f64>],
    i: usize,
    idx: &[usize],
) -> (DMatrix<f64>, DMatrix<f64>) {
    let ag = &agents[i];
    let di = cols(&red.dh[i], &ag.inst);
    let bi = cols(&red.b, &ag.inst);
    let wdi = weighted(&ag.rows.w, &di);
    let vb = &v[i] * ag.discount;
    let lhs = wdi.transpose() * cols(&red.dh[i], idx) + bi.transpose() * &vb * cols(&red.b, idx);
    let rhs = wdi.transpose() * &red.ch[i] + bi.transpose() * &vb * &red.a;
    (lhs, rhs)
}

/// Rules `u = -F s` for one period given continuation values `v` and the
/// jump belief `n` for next period.
pub(crate) fn best_response(
    model: &StateSpaceModel,
    agents: &[Agent],
    order: Order,
    v: &[DMatrix<f64>],
    n: &DMatrix<f64>,
) -> Result<(DMatrix<f64>, Reduced), GameError> {
    let red = reduce(model, agents, n)?;
    let nu = model.n_inst();
    let np = model.n_pre;
    let stack = |members: &[usize], idx: &[usize], extra: Option<&[usize]>| {
        let rows: usize = members.iter().map(|&i| agents[i].inst.len()).sum();
        let mut lhs = DMatrix::zeros(rows, idx.len());
        let mut rhs = DMatrix::zeros(rows, np);
        let mut k_mat = DMatrix::zeros(rows, extra.map_or(0, |e| e.len()));
        let mut r0 = 0;
        for &i in members {
            let k = agents[i].inst.len();
            let (l, r) = foc_block(&red, agents, v, i, idx);
            lhs.rows_mut(r0, k).copy_from(&l);
            rhs.rows_mut(r0, k).copy_from(&r);
            if let Some(e) = extra {
                let (l2, _) = foc_block(&red, agents, v, i, e);
                k_mat.rows_mut(r0, k).copy_from(&l2);
            }
            r0 += k;
        }
        (lhs, rhs, k_mat)
    };
    let f = match order {
        Order::Simultaneous => {
            let members: Vec<usize> = (0..agents.len()).collect();
            let idx: Vec<usize> = agents.iter().flat_map(|a| a.inst.iter().copied()).collect();
            let (lhs, rhs, _) = stack(&members, &idx, None);
            scatter(nu, &idx, &robust_solve(&lhs, &rhs))
        }
        Order::Leader(l) => {
            let followers: Vec<usize> = (0..agents.len()).filter(|&i| i != l).collect();
            let lead_idx = agents[l].inst.clone();
            let fol_idx: Vec<usize> = followers.iter().flat_map(|&i| agents[i].inst.iter().copied()).collect();
            // Followers: u_F = -P s - Q u_L.
            let (h, r, k) = stack(&followers, &fol_idx, Some(&lead_idx));
            let p = robust_solve(&h, &r);
            let q = robust_solve(&h, &k);
            let gamma = scatter(nu, &lead_idx, &DMatrix::identity(lead_idx.len(), lead_idx.len()))
                - scatter(nu, &fol_idx, &q);
            let pi = -scatter(nu, &fol_idx, &p);
            let ag = &agents[l];
            let c_t = &red.ch[l] + &red.dh[l] * &pi;
            let a_t = &red.a + &red.b * &pi;
            let dg = &red.dh[l] * &gamma;
            let bg = &red.b * &gamma;
            let wdg = weighted(&ag.rows.w, &dg);
            let vb = &v[l] * ag.discount;
            let lhs = wdg.transpose() * &dg + bg.transpose() * &vb * &bg;
            let rhs = wdg.transpose() * &c_t + bg.transpose() * &vb * &a_t;
            let fl = robust_solve(&lhs, &rhs);
            &gamma * fl - pi
        }
    };
    Ok((f, red))
}

/// Value matrices and jump belief implied by playing `f` this period.
pub(crate) fn update(
    red: &Reduced,
    agents: &[Agent],
    v: &[DMatrix<f64>],
    f: &DMatrix<f64>,
) -> (Vec<DMatrix<f64>>, DMatrix<f64>) {
    let acl = &red.a - &red.b * f;
    let vn = agents
        .iter()
        .enumerate()
        .map(|(i, ag)| {
            let ccl = &red.ch[i] - &red.dh[i] * f;
            let m = ccl.transpose() * weighted(&ag.rows.w, &ccl)
                + acl.transpose() * &v[i] * &acl * ag.discount;
            (&m + m.transpose()) * 0.5
        })
        .collect();
    let n = &red.js - &red.ju * f;
    (vn, n)
}

#[derive(Debug, Clone)]
pub(crate) struct Stationary {
    pub n: DMatrix<f64>,
    pub v: Vec<DMatrix<f64>>,
    pub iterations: usize,
    pub damping: f64,
    pub change: f64,
}

const DAMPING_SCHEDULE: [f64; 3] = [0.5, 0.25, 0.1];

/// Infinite-horizon rules by damped iteration on the period map, starting
/// from zero continuation values. Weaker damping is tried if a stronger
/// one fails to settle.
pub(crate) fn solve_stationary(
    model: &StateSpaceModel,
    agents: &[Agent],
    order: Order,
    tol: f64,
    cap: usize,
) -> Result<Stationary, GameError> {
    let (np, nj) = (model.n_pre, model.n_jump);
    let mut last = (0, f64::INFINITY);
    for &w in &DAMPING_SCHEDULE {
        let mut v: Vec<DMatrix<f64>> = vec![DMatrix::zeros(np, np); agents.len()];
        let mut n = DMatrix::zeros(nj, np);
        let mut prev: Option<DMatrix<f64>> = None;
        for it in 0..cap {
            let (raw, red) = match best_response(model, agents, order, &v, &n) {
                Ok(x) => x,
                Err(_) => break,
            };
            let f = match &prev {
                Some(p) => p * (1.0 - w) + &raw * w,
                None => raw,
            };
            let (vn, n_raw) = update(&red, agents, &v, &f);
            let n_new = &n * (1.0 - w) + &n_raw * w;
            let change = prev
                .as_ref()
                .map(|p| (&f - p).amax().max((&n_new - &n).amax()))
                .unwrap_or(f64::INFINITY);
            let finite = f.iter().chain(n_new.iter()).all(|x| x.is_finite())
                && vn.iter().all(|m| m.iter().all(|x| x.is_finite()));
            last = (it + 1, change);
            if !finite {
                break;
            }
            v = vn;
            n = n_new;
            if change < tol && it > 5 {
                return Ok(Stationary { n, v, iterations: it + 1, damping: w, change });
            }
            prev = Some(f);
        }
    }
    Err(GameError::BestResponseNonConvergence { iterations: last.0, change: last.1 })
}

pub(crate) struct BackwardRules {
    pub gains: Vec<DMatrix<f64>>,
    pub jumps: Vec<DMatrix<f64>>,
    /// Rules before this date repeat the rule at this date.
    pub stationary_before: Option<usize>,
}

/// Backward induction over `horizon` periods from terminal values.
pub(crate) fn backward(
    model: &StateSpaceModel,
    agents: &[Agent],
    order: Order,
    horizon: usize,
    terminal_v: Vec<DMatrix<f64>>,
    terminal_n: DMatrix<f64>,
) -> Result<BackwardRules, GameError> {
    let mut gains: Vec<DMatrix<f64>> = Vec::with_capacity(horizon);
    let mut jumps: Vec<DMatrix<f64>> = Vec::with_capacity(horizon);
    let mut v = terminal_v;
    let mut n_next = terminal_n;
    let mut stationary_before = None;
    for t in (0..horizon).rev() {
        if stationary_before.is_some() {
            gains.push(gains.last().cloned().expect("rule"));
            jumps.push(jumps.last().cloned().expect("rule"));
            continue;
        }
        let (f, red) = best_response(model, agents, order, &v, &n_next)?;
        let (vn, n) = update(&red, agents, &v, &f);
        if let (Some(fp), Some(np)) = (gains.last(), jumps.last()) {
            let df = (&f - fp).amax();
            let dn = (&n - np).amax();
            let dv = vn.iter().zip(&v).map(|(a, b)| (a - b).amax()).fold(0.0, f64::max);
            // Values scale with the losses; gains do not.
            let scale = vn.iter().map(|m| m.amax()).fold(0.0, f64::max);
            if df < 1e-10 && dn < 1e-10 && dv <= 1e-10 * scale {
                stationary_before = Some(t + 1);
                gains.push(gains.last().cloned().expect("rule"));
                jumps.push(jumps.last().cloned().expect("rule"));
                continue;
            }
        }
        if !f.iter().all(|x| x.is_finite()) {
            return Err(GameError::BestResponseNonConvergence { iterations: horizon - t, change: f64::INFINITY });
        }
        gains.push(f);
        jumps.push(n.clone());
        v = vn;
        n_next = n;
    }
    gains.reverse();
    jumps.reverse();
    Ok(BackwardRules { gains, jumps, stationary_before })
}
