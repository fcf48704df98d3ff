use nalgebra::DVector;
use rayon::prelude::*;

use super::players::Player;
use super::solve::{solve_feedback_nash, solve_game, BargainingOutcome, Concept, EquilibriumResult, GameOptions, PolicyMode};
use crate::error::GameError;
use crate::model::StateSpaceModel;

fn side_loss(eq: &EquilibriumResult, side: &[usize]) -> f64 {
    side.iter().map(|&i| eq.losses[i].loss).sum()
}

/// Nash bargaining between two groups of players.
///
/// The threat point is the feedback Nash outcome. The frontier is traced by
/// letting the two sides pool their instruments with relative weight `mu`
/// on side one, over `resolution` evenly spaced values of `mu` in [0, 1].
/// Players outside both sides keep playing Nash against the pool.
pub fn nash_bargaining(
    model: &StateSpaceModel,
    players: &[Player],
    sides: &[Vec<usize>; 2],
    start: &DVector<f64>,
    opts: &GameOptions,
    resolution: usize,
) -> Result<EquilibriumResult, GameError> {
    if sides.iter().any(|s| s.is_empty()) || sides[0].iter().any(|i| sides[1].contains(i)) {
        return Err(GameError::InvalidPlayers("bargaining needs two disjoint, non-empty sides".into()));
    }
    if sides.iter().flatten().any(|&i| i >= players.len()) {
        return Err(GameError::InvalidPlayers("bargaining side names an unknown player".into()));
    }
    if resolution < 2 {
        return Err(GameError::InvalidWeights("frontier needs at least two points".into()));
    }
    let nash = solve_feedback_nash(model, players, start, opts)?;
    let threat = [side_loss(&nash, &sides[0]), side_loss(&nash, &sides[1])];
    let members: Vec<usize> = sides[0].iter().chain(&sides[1]).copied().collect();

    let grid: Vec<f64> = (0..resolution).map(|k| k as f64 / (resolution - 1) as f64).collect();
    let solved: Vec<Result<EquilibriumResult, GameError>> = grid
        .par_iter()
        .map(|&mu| {
            let weights = members
                .iter()
                .map(|m| if sides[0].contains(m) { mu } else { 1.0 - mu })
                .collect();
            solve_game(model, players, &Concept::Coalition { members: members.clone(), weights }, start, opts)
        })
        .collect();
    // A weight with no stable pooled equilibrium is a gap in the frontier.
    if let Some(Err(e)) = solved.iter().find(|r| r.is_err()).filter(|_| solved.iter().all(Result::is_err)) {
        return Err(e.clone());
    }
    let (grid, points): (Vec<f64>, Vec<EquilibriumResult>) =
        grid.into_iter().zip(solved).filter_map(|(mu, r)| r.ok().map(|eq| (mu, eq))).unzip();

    let frontier: Vec<(f64, f64, f64)> = grid
        .iter()
        .zip(&points)
        .map(|(&mu, eq)| (mu, side_loss(eq, &sides[0]), side_loss(eq, &sides[1])))
        .collect();
    let mut best: Option<(usize, f64)> = None;
    for (k, &(_, l1, l2)) in frontier.iter().enumerate() {
        let (g1, g2) = (threat[0] - l1, threat[1] - l2);
        if g1 > 0.0 && g2 > 0.0 {
            let product = g1 * g2;
            if best.is_none_or(|(_, p)| product > p) {
                best = Some((k, product));
            }
        }
    }
    let (mut chosen, outcome) = match best {
        Some((k, _)) => {
            let (mu, l1, l2) = frontier[k];
            let eq = points.into_iter().nth(k).expect("grid point");
            (eq, BargainingOutcome { mu, threat, agreed: [l1, l2], frontier, no_bargain: false })
        }
        None => (
            nash,
            BargainingOutcome { mu: f64::NAN, threat, agreed: threat, frontier, no_bargain: true },
        ),
    };
    chosen.mode = PolicyMode::Bargaining;
    chosen.bargaining = Some(outcome);
    Ok(chosen)
}
