//! Configuration, file formats, convergence sweeps and the command-line
//! interface around [`peflow_core`].

pub mod commands;
pub mod config;
pub mod csv_io;
pub mod error;
pub mod report;

pub use commands::{cmd_converge, cmd_simulate, cmd_verify, parse_checks, ConvergeMode, Setup};
pub use config::RunConfig;
pub use error::CliError;
