//! Scenario files, reports and the command-line front end for
//! [`derivex_core`].

pub mod commands;
pub mod error;
pub mod format;
pub mod report;
pub mod scan;
pub mod scenario;

pub use error::{CliError, ScenarioError};
pub use scenario::{load_scenario, parse_scenario, Instrument, Scenario};
