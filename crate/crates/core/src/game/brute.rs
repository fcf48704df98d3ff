//! Exhaustive search over discretised strategies.
//!
//! Used to cross-check the Riccati solvers on tiny games. Stage losses are
//! read off simulated world states, not from the solvers' quadratic forms.

use nalgebra::DVector;

use super::players::Player;
use super::solve::Concept;
use crate::error::GameError;
use crate::model::StateSpaceModel;
use crate::solver::Trajectory;

const NODE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    /// Instrument vectors along the equilibrium path.
    pub instruments: Vec<DVector<f64>>,
    /// Discounted loss of every player along that path.
    pub losses: Vec<f64>,
    pub nodes: u128,
}

struct Search<'a> {
    model: &'a StateSpaceModel,
    players: &'a [Player],
    /// Active player index and its action list (instrument index, value) tuples.
    actors: Vec<(usize, Vec<Vec<(usize, f64)>>)>,
    leader: Option<usize>,
    horizon: usize,
    discount: Vec<f64>,
}

struct Outcome {
    losses: Vec<f64>,
    path: Vec<DVector<f64>>,
}

impl Search<'_> {
    fn profiles(&self) -> usize {
        self.actors.iter().map(|(_, a)| a.len()).product()
    }

    fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.actors.len()];
        for (k, (_, acts)) in self.actors.iter().enumerate().rev() {
            out[k] = idx % acts.len();
            idx /= acts.len();
        }
        out
    }

    fn encode(&self, choice: &[usize]) -> usize {
        let mut idx = 0;
        for (k, (_, acts)) in self.actors.iter().enumerate() {
            idx = idx * acts.len() + choice[k];
        }
        idx
    }

    fn instruments(&self, choice: &[usize]) -> DVector<f64> {
        let mut u = DVector::zeros(self.model.n_inst());
        for (k, (_, acts)) in self.actors.iter().enumerate() {
            for &(i, v) in &acts[choice[k]] {
                u[i] = v;
            }
        }
        u
    }

    fn stage(&self, z: &DVector<f64>, u: &DVector<f64>) -> (Vec<f64>, DVector<f64>) {
        let next = self.model.step(z, u);
        let traj = Trajectory::from_path(self.model, vec![z.clone()], vec![u.clone()], next.clone());
        let losses = self.players.iter().map(|p| p.loss.evaluate(&traj)).collect();
        (losses, next)
    }

    fn magnitude(&self, choice: &[usize]) -> f64 {
        self.instruments(choice).iter().map(|v| v.abs()).sum()
    }

    fn solve(&self, z: &DVector<f64>, t: usize) -> Outcome {
        let n = self.profiles();
        let mut totals: Vec<Vec<f64>> = Vec::with_capacity(n);
        let mut paths: Vec<Vec<DVector<f64>>> = Vec::with_capacity(n);
        for idx in 0..n {
            let choice = self.decode(idx);
            let u = self.instruments(&choice);
            let (stage, next) = self.stage(z, &u);
            let mut path = vec![u];
            let total = if t + 1 < self.horizon {
                let cont = self.solve(&next, t + 1);
                path.extend(cont.path);
                stage.iter().zip(&cont.losses).zip(&self.discount).map(|((s, c), d)| s + d * c).collect()
            } else {
                stage
            };
            totals.push(total);
            paths.push(path);
        }
        let pick = match self.leader {
            None => self.equilibrium(&totals, None),
            Some(l) => {
                let lead_pos = self.actors.iter().position(|(p, _)| *p == l).expect("leader acts");
                let player = self.actors[lead_pos].0;
                let mut best: Option<(usize, f64, f64)> = None;
                for a in 0..self.actors[lead_pos].1.len() {
                    let idx = self.equilibrium(&totals, Some((lead_pos, a)));
                    let loss = totals[idx][player];
                    let mag = self.magnitude(&self.decode(idx));
                    if best.is_none_or(|(_, bl, bm)| loss < bl || (loss == bl && mag < bm)) {
                        best = Some((idx, loss, mag));
                    }
                }
                best.expect("leader has actions").0
            }
        };
        Outcome { losses: totals[pick].clone(), path: paths[pick].clone() }
    }

    /// Pure equilibrium among actors (optionally with one actor's action
    /// fixed); ties go to the smallest instrument magnitude. Falls back to
    /// the profile with the least maximal regret if no pure equilibrium
    /// exists on the grid.
    fn equilibrium(&self, totals: &[Vec<f64>], fixed: Option<(usize, usize)>) -> usize {
        let mut best: Option<(usize, f64, f64)> = None;
        for idx in 0..totals.len() {
            let choice = self.decode(idx);
            if let Some((k, a)) = fixed {
                if choice[k] != a {
                    continue;
                }
            }
            let mut regret = 0.0_f64;
            for (k, (p, acts)) in self.actors.iter().enumerate() {
                if fixed.is_some_and(|(fk, _)| fk == k) {
                    continue;
                }
                let mut alt = choice.clone();
                for a in 0..acts.len() {
                    alt[k] = a;
                    let gain = totals[idx][*p] - totals[self.encode(&alt)][*p];
                    regret = regret.max(gain);
                }
            }
            let mag = self.magnitude(&choice);
            let better = match best {
                None => true,
                Some((_, r, m)) => regret < r || (regret == r && mag < m),
            };
            if better {
                best = Some((idx, regret, mag));
            }
        }
        best.expect("at least one profile").0
    }
}

/// Backward induction over the full game tree.
///
/// `grids[i]` lists the values tried for the `i`-th instrument of the active
/// players, in player order. `concept` is `Nash` or `Stackelberg`.
pub fn brute_force_equilibrium(
    model: &StateSpaceModel,
    players: &[Player],
    concept: &Concept,
    grids: &[Vec<f64>],
    start: &DVector<f64>,
    horizon: usize,
) -> Result<BruteForceResult, GameError> {
    if model.n_jump != 0 {
        return Err(GameError::JumpVariablesUnsupported);
    }
    if horizon == 0 || horizon > 2 {
        return Err(GameError::InvalidPlayers(format!("brute force supports horizons 1 and 2, got {horizon}")));
    }
    super::players::validate_players(model, players)?;
    let leader = match concept {
        Concept::Nash => None,
        Concept::Stackelberg { leader } => Some(*leader),
        _ => return Err(GameError::InvalidPlayers("brute force covers Nash and Stackelberg play".into())),
    };
    let mut actors = Vec::new();
    let mut g = grids.iter();
    for (i, p) in players.iter().enumerate() {
        if !p.spec.active || p.spec.instruments.is_empty() {
            continue;
        }
        let mut acts: Vec<Vec<(usize, f64)>> = vec![Vec::new()];
        for id in &p.spec.instruments {
            let k = model.instrument_index(*id).expect("validated");
            let grid = g.next().ok_or_else(|| GameError::InvalidPlayers("fewer grids than instruments".into()))?;
            acts = acts
                .into_iter()
                .flat_map(|a| grid.iter().map(move |&v| {
                    let mut a = a.clone();
                    a.push((k, v));
                    a
                }))
                .collect();
        }
        actors.push((i, acts));
    }
    if g.next().is_some() {
        return Err(GameError::InvalidPlayers("more grids than instruments".into()));
    }
    if let Some(l) = leader {
        if !actors.iter().any(|(p, _)| *p == l) {
            return Err(GameError::InvalidPlayers("leader has no instruments".into()));
        }
    }
    let per_stage: u128 = actors.iter().map(|(_, a)| a.len() as u128).product();
    let nodes: u128 = (1..=horizon as u32).map(|t| per_stage.pow(t)).sum();
    if nodes > NODE_LIMIT {
        return Err(GameError::SpaceTooLarge { nodes });
    }
    let discount = players.iter().map(|p| p.loss.discount().unwrap_or(1.0)).collect();
    let search = Search { model, players, actors, leader, horizon, discount };
    let mut z = DVector::zeros(model.n_state());
    z.rows_mut(0, model.n_pre).copy_from(start);
    let out = search.solve(&z, 0);
    Ok(BruteForceResult { instruments: out.path, losses: out.losses, nodes })
}
