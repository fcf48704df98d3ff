pub mod bargaining;
pub mod brute;
pub mod consistency;
pub mod loss;
pub mod players;
mod riccati;
pub mod solve;

pub use bargaining::nash_bargaining;
pub use brute::{brute_force_equilibrium, BruteForceResult};
pub use consistency::{commitment_gap, precommitment_plan, time_consistency_check, CommitmentGap};
pub use loss::{evaluate_loss, LossRows, LossScope, LossSpec, LossWeights, Objective};
pub use players::{default_players, validate_players, LossDefaults, Player, PlayerId, PlayerSpec};
pub use solve::{
    simulate_rules, solve_cooperative, solve_feedback_nash, solve_game, solve_stackelberg,
    BargainingOutcome, Concept, EquilibriumResult, FeedbackRule, GameOptions, PlayerLoss,
    PolicyMode, SolveDiagnostics, Terminal, equilibrium_unit_tol, path_matrix,
};
