//! Simulation harness: the shared RK4 stepper, JSON scenarios, the runner
//! that dispatches them and the CSV records they produce.

pub mod record;
pub mod rk4;
pub mod runner;
pub mod scenario;

pub use record::{emit_csv, read_csv, to_csv_string, RunRecord};
pub use runner::{initial_estimates, is_deterministic, refinement_gap, run_scenario};
pub use scenario::{
    builtin, builtin_names, GainSpec, GridSpec, RegressorSource, RegressorSpec, Scenario,
    ScenarioKind,
};
