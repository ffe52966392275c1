//! Configuration files, CSV output and the topology report used by the
//! `etsmc` binary.

mod config;
mod output;
mod report;

pub use config::{parse_config, parse_config_str, to_toml, validate_config, ConfigError};
pub use output::{
    digits_from_env, emit_csv, emit_csv_with_digits, fmt_num, parse_trajectory_csv, trajectory_header,
    write_diagnostics, write_events, write_trajectory, DEFAULT_DIGITS, DIGITS_ENV,
};
pub use report::topology_report;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const NUMERIC: i32 = 2;
}
