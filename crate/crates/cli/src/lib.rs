//! Scenario files in, deterministic JSON reports out.

pub mod error;
pub mod report;
pub mod run;
pub mod scenario;

pub use error::CliError;
pub use report::Report;
pub use run::{run, run_demo, RunOptions};
pub use scenario::{parse_scenario, render, Scenario, ScenarioDoc};
