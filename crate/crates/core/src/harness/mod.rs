//! Configuration, result files, and the phase-transition sweep driver.

mod config;
mod results;
mod sweep;

pub use crate::rng::derive_seed;
pub use config::{
    parse_config, read_config, MethodSelection, RegionSizeMode, RunConfig, KNOWN_KEYS,
};
pub use results::{read_results, write_results, SweepResult, SweepRow, CSV_COLUMNS};
pub use sweep::{resolve_workers, run_sweep, SweepConfig, WORKERS_ENV};
