//! Configuration files, result records and the command implementations
//! behind the `frachamil` binary.

mod commands;
mod config;
mod records;

pub use commands::{cmd_derivative, cmd_nehari, cmd_solve, cmd_verify, DerivativeArgs, ExitCode, SEED_ENV};
pub use config::{load_run_config, parse_run_config, RunConfig};
pub use records::{
    read_profile_csv, solution_json, write_field_csv, Diagnostics, NormsRecord, Outputs, RunManifest, SolutionJson,
};
