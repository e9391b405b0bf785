//! Library surface of the command-line front end, factored out so the test
//! suites can drive the exact command implementations in process.

pub mod commands;
pub mod config;
pub mod csv;

pub use commands::{cmd_init, cmd_oracle, cmd_sweep, cmd_train, CliError, CliResult};
pub use config::{template, template_config, RunConfig, SCHEMA_VERSION};
