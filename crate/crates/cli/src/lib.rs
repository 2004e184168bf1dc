//! Library side of the `bipartite` command-line tool.

pub mod commands;
pub mod config;
pub mod error;
pub mod plot;
pub mod table;

pub use commands::{cmd_reproduce, cmd_simulate, cmd_steady, cmd_validate, figure_config, FigureId};
pub use config::{ScenarioArgs, ScenarioConfig};
pub use error::{CliError, Result};
