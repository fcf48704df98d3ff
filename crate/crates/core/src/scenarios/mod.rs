pub mod diagnostics;
pub mod gains;
pub mod run;
pub mod scenario;
pub mod suite;

pub use diagnostics::{convergence_diagnostics, Convergence, DiagnosticsReport, SignPattern};
pub use gains::{cooperation_gains, sm_blocking_probe, BlockingReport, GainsCell, GainsTable, RelativeGain};
pub use run::{run_scenario, scenario_model, scenario_players, solve_mode, ScenarioOutcome};
pub use scenario::{
    debt_target_scenario, demand_shock_scenario, inflation_shock_scenario, BargainingSides, BargainingSpec, SolverSettings,
    Scenario, Shock, DEFAULT_HORIZON,
};
pub use suite::{sign_suite, SignCheck, HEADLINE_CUT};
