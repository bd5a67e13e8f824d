//! Newton driver, convergence norm, sparse solves and load stepping.

pub mod config;
pub mod linear;
pub mod newton;
pub mod norm;
pub mod simulation;

pub use config::{Phase, SolverConfig, StepSchedule};
pub use linear::SparseLu;
pub use newton::{newton_step, seed_slack, NewtonReport};
pub use norm::{error_norm, FieldUpdate};
pub use simulation::{run_simulation, run_simulation_from, LoadedProblem, Monitor, Outcome, SimulationResult, StepObserver, StepRecord};
