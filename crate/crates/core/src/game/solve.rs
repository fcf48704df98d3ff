use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::loss::{LossRows, Objective};
use super::players::{validate_players, Player};
use super::riccati::{backward, solve_stationary, Agent, Order};
use crate::error::GameError;
use crate::model::{InstrumentId, RegimeSpec, StateSpaceModel};
use crate::solver::{classify_matrix, Classification, PolicyRule, StabilityReport, Trajectory, UNIT_CIRCLE_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyMode {
    Passive,
    Nash,
    Cooperative,
    Stackelberg,
    Bargaining,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Terminal {
    /// Continuation values of the infinite-horizon equilibrium.
    Stationary,
    /// No loss after the horizon.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GameOptions {
    pub horizon: usize,
    pub terminal: Terminal,
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for GameOptions {
    fn default() -> Self {
        Self { horizon: 100, terminal: Terminal::Stationary, tolerance: 1e-11, max_iterations: 3000 }
    }
}

/// How the players' problems are combined.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Concept {
    Nash,
    /// One planner over every active instrument, minimising the weighted
    /// sum of all players' losses.
    Cooperative { weights: Vec<f64> },
    /// Player `leader` moves first within each period.
    Stackelberg { leader: usize },
    /// `members` pool their instruments under the weighted sum of their
    /// losses and play Nash against everyone else.
    Coalition { members: Vec<usize>, weights: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeedbackRule {
    /// Per date, `u = -gain * s`.
    pub gains: Vec<DMatrix<f64>>,
    /// Per date, jump variables `x = jump * s`.
    pub jumps: Vec<DMatrix<f64>>,
    /// Instruments per player, in player order.
    pub owners: Vec<(String, Vec<InstrumentId>)>,
    pub stationary_before: Option<usize>,
}

impl FeedbackRule {
    pub fn horizon(&self) -> usize {
        self.gains.len()
    }

    /// Rows of the rule at date `t` belonging to `player`.
    pub fn player_gain(&self, model: &StateSpaceModel, t: usize, player: usize) -> DMatrix<f64> {
        let idx: Vec<usize> = self.owners[player]
            .1
            .iter()
            .filter_map(|id| model.instrument_index(*id))
            .collect();
        self.gains[t].select_rows(idx.iter())
    }

    pub fn at(&self, t: usize) -> PolicyRule {
        PolicyRule { gain: self.gains[t].clone() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerLoss {
    pub name: String,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveDiagnostics {
    pub iterations: usize,
    pub damping: f64,
    pub final_change: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BargainingOutcome {
    pub mu: f64,
    /// Threat-point losses of the two sides.
    pub threat: [f64; 2],
    pub agreed: [f64; 2],
    /// (mu, side-one loss, side-two loss) at each grid point.
    pub frontier: Vec<(f64, f64, f64)>,
    pub no_bargain: bool,
}

#[derive(Debug, Clone)]
pub struct EquilibriumResult {
    pub mode: PolicyMode,
    pub concept: Concept,
    pub players: Vec<Player>,
    pub options: GameOptions,
    pub start: DVector<f64>,
    pub rules: FeedbackRule,
    pub trajectory: Trajectory,
    pub losses: Vec<PlayerLoss>,
    /// Equal-weight sum of all players' losses.
    pub joint_loss: f64,
    /// Closed loop of the date-0 rule with the jump variables left free.
    pub stability: StabilityReport,
    /// Predetermined states along the equilibrium, jumps on the belief.
    pub path_stability: StabilityReport,
    pub diagnostics: SolveDiagnostics,
    pub bargaining: Option<BargainingOutcome>,
}

impl EquilibriumResult {
    pub fn loss_of(&self, name: &str) -> Option<f64> {
        self.losses.iter().find(|l| l.name == name).map(|l| l.loss)
    }
}

fn agent_for(model: &StateSpaceModel, instruments: &[InstrumentId], objective: &Objective) -> Result<Agent, GameError> {
    let discount = objective
        .discount()
        .ok_or_else(|| GameError::InvalidPlayers("objective mixes discount factors".into()))?;
    let inst = instruments
        .iter()
        .map(|id| {
            model
                .instrument_index(*id)
                .ok_or_else(|| GameError::InvalidPlayers(format!("{} is not an instrument", id.label())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Agent { inst, rows: LossRows::of(model, objective), discount })
}

fn check_weights(weights: &[f64], n: usize) -> Result<(), GameError> {
    if weights.len() != n {
        return Err(GameError::InvalidWeights(format!("{} weights for {} players", weights.len(), n)));
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(GameError::InvalidWeights("weights must be finite and non-negative".into()));
    }
    if weights.iter().all(|w| *w == 0.0) {
        return Err(GameError::InvalidWeights("at least one weight must be positive".into()));
    }
    Ok(())
}

fn active_instruments(p: &Player) -> &[InstrumentId] {
    if p.spec.active {
        &p.spec.instruments
    } else {
        &[]
    }
}

fn build_agents(model: &StateSpaceModel, players: &[Player], concept: &Concept) -> Result<(Vec<Agent>, Order), GameError> {
    let solo = |i: usize| -> Result<Option<Agent>, GameError> {
        let inst = active_instruments(&players[i]);
        if inst.is_empty() {
            return Ok(None);
        }
        agent_for(model, inst, &players[i].loss).map(Some)
    };
    match concept {
        Concept::Nash => {
            let mut agents = Vec::new();
            for i in 0..players.len() {
                agents.extend(solo(i)?);
            }
            Ok((agents, Order::Simultaneous))
        }
        Concept::Cooperative { weights } => {
            check_weights(weights, players.len())?;
            let members: Vec<usize> = (0..players.len()).collect();
            let agent = coalition(model, players, &members, weights)?;
            Ok((agent.into_iter().collect(), Order::Simultaneous))
        }
        Concept::Coalition { members, weights } => {
            check_weights(weights, members.len())?;
            if members.iter().any(|&m| m >= players.len()) {
                return Err(GameError::InvalidPlayers("coalition member out of range".into()));
            }
            let mut agents: Vec<Agent> = coalition(model, players, members, weights)?.into_iter().collect();
            for i in 0..players.len() {
                if !members.contains(&i) {
                    agents.extend(solo(i)?);
                }
            }
            Ok((agents, Order::Simultaneous))
        }
        Concept::Stackelberg { leader } => {
            let leader = *leader;
            if leader >= players.len() || !players[leader].spec.active {
                return Err(GameError::InvalidPlayers("Stackelberg leader must be an active player".into()));
            }
            let mut agents = Vec::new();
            let mut lead_pos = None;
            for i in 0..players.len() {
                if i == leader {
                    // An instrument-less leader still anchors the order.
                    lead_pos = Some(agents.len());
                    agents.push(agent_for(model, active_instruments(&players[i]), &players[i].loss)?);
                } else {
                    agents.extend(solo(i)?);
                }
            }
            Ok((agents, Order::Leader(lead_pos.expect("leader placed"))))
        }
    }
}

fn coalition(model: &StateSpaceModel, players: &[Player], members: &[usize], weights: &[f64]) -> Result<Option<Agent>, GameError> {
    let inst: Vec<InstrumentId> = members.iter().flat_map(|&m| active_instruments(&players[m]).iter().copied()).collect();
    if inst.is_empty() {
        return Ok(None);
    }
    let parts: Vec<(f64, &Objective)> = members.iter().zip(weights).map(|(&m, &w)| (w, &players[m].loss)).collect();
    agent_for(model, &inst, &Objective::combine(&parts)).map(Some)
}

fn mode_of(concept: &Concept) -> PolicyMode {
    match concept {
        Concept::Nash => PolicyMode::Nash,
        Concept::Cooperative { .. } => PolicyMode::Cooperative,
        Concept::Stackelberg { .. } => PolicyMode::Stackelberg,
        Concept::Coalition { .. } => PolicyMode::Bargaining,
    }
}

/// Simulates the path generated by date-varying feedback rules.
pub fn simulate_rules(model: &StateSpaceModel, rules: &FeedbackRule, start: &DVector<f64>) -> Trajectory {
    let (np, nj) = (model.n_pre, model.n_jump);
    let mut s = start.clone();
    let mut states = Vec::with_capacity(rules.horizon());
    let mut insts = Vec::with_capacity(rules.horizon());
    let mut z = DVector::zeros(np + nj);
    z.rows_mut(0, np).copy_from(start);
    for t in 0..rules.horizon() {
        z = DVector::zeros(np + nj);
        z.rows_mut(0, np).copy_from(&s);
        if nj > 0 {
            z.rows_mut(np, nj).copy_from(&(&rules.jumps[t] * &s));
        }
        let u = -(&rules.gains[t] * &s);
        let next = model.step(&z, &u);
        states.push(z);
        insts.push(u);
        s = next.rows(0, np).into_owned();
        z = next;
    }
    Trajectory::from_path(model, states, insts, z)
}

/// Solves `players` under `concept` from predetermined states `start`.
pub fn solve_game(
    model: &StateSpaceModel,
    players: &[Player],
    concept: &Concept,
    start: &DVector<f64>,
    opts: &GameOptions,
) -> Result<EquilibriumResult, GameError> {
    validate_players(model, players)?;
    if start.len() != model.n_pre {
        return Err(crate::error::SolverError::DimensionMismatch(format!(
            "start has {} entries, model has {} predetermined states",
            start.len(),
            model.n_pre
        ))
        .into());
    }
    let (agents, order) = build_agents(model, players, concept)?;
    let (np, nj) = (model.n_pre, model.n_jump);
    let (terminal_v, terminal_n, diagnostics) = match opts.terminal {
        Terminal::Stationary => {
            let st = solve_stationary(model, &agents, order, opts.tolerance, opts.max_iterations)?;
            let d = SolveDiagnostics { iterations: st.iterations, damping: st.damping, final_change: st.change };
            (st.v, st.n, d)
        }
        Terminal::Zero => (
            vec![DMatrix::zeros(np, np); agents.len()],
            DMatrix::zeros(nj, np),
            SolveDiagnostics { iterations: 0, damping: 1.0, final_change: 0.0 },
        ),
    };
    let bw = backward(model, &agents, order, opts.horizon, terminal_v, terminal_n)?;
    let owners = players
        .iter()
        .map(|p| (p.name().to_string(), active_instruments(p).to_vec()))
        .collect();
    let rules = FeedbackRule { gains: bw.gains, jumps: bw.jumps, owners, stationary_before: bw.stationary_before };
    let tol = equilibrium_unit_tol(opts.tolerance);
    let reference = if rules.horizon() > 0 { rules.at(0) } else { PolicyRule::passive(model) };
    let stability = classify_matrix(&reference.closed_loop(model)?, model.n_jump, tol)?;
    let path_stability = match rules.jumps.first() {
        Some(jump) => classify_matrix(&path_matrix(model, &reference, jump)?, 0, tol)?,
        None => stability.clone(),
    };
    if opts.terminal == Terminal::Stationary && path_stability.classification != Classification::Determinate {
        return Err(GameError::NotDeterminate { radius: path_stability.spectral_radius() });
    }
    let trajectory = simulate_rules(model, &rules, start);
    let losses: Vec<PlayerLoss> = players
        .iter()
        .map(|p| PlayerLoss { name: p.name().to_string(), loss: p.loss.evaluate(&trajectory) })
        .collect();
    let joint_loss = losses.iter().map(|l| l.loss).sum();
    Ok(EquilibriumResult {
        mode: mode_of(concept),
        concept: concept.clone(),
        players: players.to_vec(),
        options: *opts,
        start: start.clone(),
        rules,
        trajectory,
        losses,
        joint_loss,
        stability,
        path_stability,
        diagnostics,
        bargaining: None,
    })
}

/// Unit-circle tolerance for iterated equilibria. Unit roots of the
/// closed loop can be defective, and a defective root moves by roughly
/// the square root of the error in the rule.
pub fn equilibrium_unit_tol(solve_tolerance: f64) -> f64 {
    UNIT_CIRCLE_TOL.max(solve_tolerance.sqrt())
}

/// Transition of the predetermined states once the jumps sit on `jump * s`.
pub fn path_matrix(model: &StateSpaceModel, rule: &PolicyRule, jump: &DMatrix<f64>) -> Result<DMatrix<f64>, GameError> {
    let a = rule.closed_loop(model)?;
    let np = model.n_pre;
    let mut embed = DMatrix::<f64>::zeros(model.n_state(), np);
    embed.view_mut((0, 0), (np, np)).fill_with_identity();
    embed.view_mut((np, 0), (model.n_jump, np)).copy_from(jump);
    Ok(a.rows(0, np) * embed)
}

pub fn solve_feedback_nash(
    model: &StateSpaceModel,
    players: &[Player],
    start: &DVector<f64>,
    opts: &GameOptions,
) -> Result<EquilibriumResult, GameError> {
    solve_game(model, players, &Concept::Nash, start, opts)
}

/// Planner over all instruments; `weights` default to equal.
pub fn solve_cooperative(
    model: &StateSpaceModel,
    players: &[Player],
    weights: Option<&[f64]>,
    start: &DVector<f64>,
    opts: &GameOptions,
) -> Result<EquilibriumResult, GameError> {
    let weights = weights.map(<[f64]>::to_vec).unwrap_or_else(|| vec![1.0; players.len()]);
    solve_game(model, players, &Concept::Cooperative { weights }, start, opts)
}

/// Within-period leadership of `leader` over `followers` in the Single Market.
pub fn solve_stackelberg(
    model: &StateSpaceModel,
    leader: &Player,
    followers: &[Player],
    start: &DVector<f64>,
    opts: &GameOptions,
) -> Result<EquilibriumResult, GameError> {
    if !matches!(model.regime, RegimeSpec::SingleMarket { .. }) {
        return Err(GameError::InvalidPlayers("Stackelberg play is defined for the Single Market".into()));
    }
    let players: Vec<Player> = std::iter::once(leader.clone()).chain(followers.iter().cloned()).collect();
    solve_game(model, &players, &Concept::Stackelberg { leader: 0 }, start, opts)
}
