pub mod calibration;
pub mod equations;
pub mod steady;
pub mod system;
pub mod types;

pub use calibration::{Calibration, BASELINE_REAL_RATE};
pub use equations::{
    accumulate_stocks, aggregate_demand, desired_wealth, disposable_income, parity_condition,
    price_update, tax_rule, trade_balance, NextStocks,
};
pub use steady::steady_state;
pub use system::{
    assemble_linear_system, assemble_with, Drivers, Equation, EquationKind, InstrumentId,
    Observable, StateSpaceModel, StateVar, StaticVar, Var,
};
pub use types::{
    BehaviorSpec, Consumer, CountryId, CountryState, Expectations, Indexation, RegimeSpec,
    WorldState,
};
