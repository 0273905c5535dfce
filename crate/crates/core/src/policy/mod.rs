//! Online policies derived from the slow value functions and their replay.

pub mod select;
pub mod simulate;

pub use select::{select_price, select_resource};
pub use simulate::{
    simulate_policy, summarize, Policy, PolicyInputs, PolicyMode, PricePolicy, RenewalEvent,
    ResourcePolicy, SimulationDiagnostics, SimulationRecord, SimulationSummary,
};
