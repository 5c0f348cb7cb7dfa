//! Command-line driver for the gaugeline simulation: configuration
//! ingestion, subcommand dispatch, deterministic parallel parameter
//! sweeps, and byte-stable CSV emission.

pub mod config;
pub mod csvio;
pub mod runs;

pub use config::{parse_config, parse_config_str, RunConfig};
pub use runs::{
    run_adiabaticity, run_compare, run_oracle, run_spectrum, run_sweep, run_trajectory, CliError,
};
